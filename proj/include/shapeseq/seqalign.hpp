#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "shapeseq/rational.hpp"

namespace shapeseq {

/// Position of `symbol` in kAlphabet ("ABCDEFSML"); throws on anything else.
std::size_t symbol_index(char symbol);

/// Symmetric 9x9 score table over the shape alphabet, diagonal fixed at 2.
class SubstitutionMatrix {
public:
    using Table = std::array<std::array<Rational, 9>, 9>;

    /// Angle letters score 1/d at letter distance d, sizes score 1 when
    /// adjacent and 1/2 for S-L, and angle-versus-size pairs score -2.
    static SubstitutionMatrix standard();

    /// Throws ShapeError if the table is asymmetric or has a diagonal entry other than 2.
    explicit SubstitutionMatrix(const Table& table);

    const Rational& operator()(char a, char b) const { return table_[symbol_index(a)][symbol_index(b)]; }
    const Table& table() const { return table_; }

    /// Least common denominator of every entry.
    std::int64_t common_denominator() const;

    friend bool operator==(const SubstitutionMatrix&, const SubstitutionMatrix&) = default;

private:
    Table table_;
};

/// 10x10 grid: a header row and header column naming the symbols (any order,
/// the corner cell is ignored), cells as integers or "p/q".
SubstitutionMatrix read_substitution_matrix(std::istream& is);
void write_substitution_matrix(std::ostream& os, const SubstitutionMatrix& m);

struct AlignParams {
    Rational gap{-2};
    SubstitutionMatrix matrix = SubstitutionMatrix::standard();

    void validate() const;
    friend bool operator==(const AlignParams&, const AlignParams&) = default;
};

/// F over (|s2| + 1) rows and (|s1| + 1) columns, zero on the first row and
/// column. Values are held as integer multiples of 1 / denominator().
class ScoreMatrix {
public:
    ScoreMatrix(std::size_t rows, std::size_t cols, std::int64_t denominator);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Rational at(std::size_t i, std::size_t j) const { return Rational(scaled(i, j), denominator_); }
    std::int64_t scaled(std::size_t i, std::size_t j) const { return cells_[i * cols_ + j]; }
    std::int64_t& scaled(std::size_t i, std::size_t j) { return cells_[i * cols_ + j]; }
    std::int64_t denominator() const { return denominator_; }

    friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::int64_t denominator_;
    std::vector<std::int64_t> cells_;
};

/// F(i, j) = max(F(i-1, j-1) + S(s1[j-1], s2[i-1]), F(i, j-1) + w, F(i-1, j) + w).
ScoreMatrix score_matrix(std::string_view s1, std::string_view s2, const AlignParams& p = {});

enum class Move : char { diagonal = 'D', up = 'U', left = 'L' };

struct AlignmentResult {
    Rational score;
    Rational normalized; ///< score / (2 * min(|s1|, |s2|)); 0 when either is empty
    std::vector<Move> path; ///< from (rows-1, cols-1) back to the first border cell reached
    std::string aligned1;   ///< s1 with '-' gap marks
    std::string aligned2;   ///< s2 with '-' gap marks
};

/// Walks back from the bottom-right cell, preferring diagonal, then up, then
/// left. The unconsumed prefix left at the border is emitted against gaps.
AlignmentResult traceback(const ScoreMatrix& m, std::string_view s1, std::string_view s2,
                          const AlignParams& p = {});

AlignmentResult align_score(std::string_view s1, std::string_view s2, const AlignParams& p = {});

/// Final score only, in linear memory.
Rational alignment_score(std::string_view s1, std::string_view s2, const AlignParams& p = {});

Rational normalized_score(const Rational& raw, std::size_t len1, std::size_t len2);

/// Tab-separated, laid out with s1 across the top and s2 down the side.
void write_score_matrix_tsv(std::ostream& os, const ScoreMatrix& m, std::string_view s1, std::string_view s2,
                            bool exact = false);

} // namespace shapeseq
