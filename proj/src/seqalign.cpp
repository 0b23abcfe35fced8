#include "shapeseq/seqalign.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "shapeseq/alphabet.hpp"
#include "shapeseq/geometry.hpp"

namespace shapeseq {

std::size_t symbol_index(char symbol) {
    const auto pos = kAlphabet.find(symbol);
    if (pos == std::string_view::npos)
        throw ShapeError(fmt::format("'{}' is not a shape symbol (expected one of {})", symbol, kAlphabet));
    return pos;
}

SubstitutionMatrix SubstitutionMatrix::standard() {
    Table t;
    const int angles = static_cast<int>(kAngleSymbols.size());
    for (int a = 0; a < 9; ++a) {
        for (int b = 0; b < 9; ++b) {
            const bool angle_a = a < angles;
            const bool angle_b = b < angles;
            const int d = std::abs(a - b);
            if (angle_a != angle_b)
                t[a][b] = Rational(-2);
            else if (d == 0)
                t[a][b] = Rational(2);
            else
                t[a][b] = Rational(1, d);
        }
    }
    return SubstitutionMatrix(t);
}

SubstitutionMatrix::SubstitutionMatrix(const Table& table) : table_(table) {
    for (std::size_t a = 0; a < 9; ++a) {
        if (table_[a][a] != Rational(2))
            throw ShapeError(fmt::format("substitution score {}-{} must be 2", kAlphabet[a], kAlphabet[a]));
        for (std::size_t b = 0; b < a; ++b)
            if (table_[a][b] != table_[b][a])
                throw ShapeError(fmt::format("substitution matrix is not symmetric at {}-{}", kAlphabet[a],
                                             kAlphabet[b]));
    }
}

std::int64_t SubstitutionMatrix::common_denominator() const {
    std::int64_t lcm = 1;
    for (const auto& row : table_)
        for (const Rational& r : row)
            lcm = std::lcm(lcm, r.denominator());
    return lcm;
}

SubstitutionMatrix read_substitution_matrix(std::istream& is) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::vector<std::string> cells;
        for (std::string cell; ls >> cell;)
            cells.push_back(cell);
        if (!cells.empty())
            rows.push_back(std::move(cells));
    }
    if (rows.size() != 10)
        throw ShapeError(fmt::format("substitution matrix needs 10 non-empty lines, got {}", rows.size()));

    auto header_symbol = [](const std::string& cell) {
        if (cell.size() != 1)
            throw ShapeError(fmt::format("'{}' is not a symbol header", cell));
        return symbol_index(cell[0]);
    };
    auto& header = rows.front();
    if (header.size() == 9)
        header.insert(header.begin(), "*");
    if (header.size() != 10)
        throw ShapeError("substitution matrix header must name 9 symbols");
    std::array<std::size_t, 9> column{};
    for (std::size_t c = 0; c < 9; ++c)
        column[c] = header_symbol(header[c + 1]);

    SubstitutionMatrix::Table t;
    std::array<bool, 9> seen_row{};
    std::array<bool, 9> seen_col{};
    for (std::size_t c : column)
        seen_col[c] = true;
    for (std::size_t r = 1; r < 10; ++r) {
        if (rows[r].size() != 10)
            throw ShapeError(fmt::format("substitution matrix row {} has {} cells, expected 10", r, rows[r].size()));
        const std::size_t a = header_symbol(rows[r][0]);
        seen_row[a] = true;
        for (std::size_t c = 0; c < 9; ++c)
            t[a][column[c]] = parse_rational(rows[r][c + 1]);
    }
    if (std::count(seen_row.begin(), seen_row.end(), true) != 9 ||
        std::count(seen_col.begin(), seen_col.end(), true) != 9)
        throw ShapeError("substitution matrix headers must name every symbol exactly once");
    return SubstitutionMatrix(t);
}

void write_substitution_matrix(std::ostream& os, const SubstitutionMatrix& m) {
    os << '*';
    for (char c : kAlphabet)
        os << '\t' << c;
    os << '\n';
    for (std::size_t a = 0; a < 9; ++a) {
        os << kAlphabet[a];
        for (std::size_t b = 0; b < 9; ++b)
            os << '\t' << format_rational(m.table()[a][b]);
        os << '\n';
    }
}

void AlignParams::validate() const {
    if (!(gap < Rational(0)))
        throw ShapeError(fmt::format("gap penalty must be negative, got {}", format_rational(gap)));
}

ScoreMatrix::ScoreMatrix(std::size_t rows, std::size_t cols, std::int64_t denominator)
    : rows_(rows), cols_(cols), denominator_(denominator), cells_(rows * cols, 0) {}

namespace {

// Scores scaled onto the common denominator of the table and the gap, so the
// recurrence runs on integers without losing exactness.
struct ScaledScores {
    std::int64_t denominator;
    std::int64_t gap;
    std::array<std::array<std::int64_t, 9>, 9> sub;

    explicit ScaledScores(const AlignParams& p) {
        p.validate();
        denominator = std::lcm(p.matrix.common_denominator(), p.gap.denominator());
        gap = p.gap.numerator() * (denominator / p.gap.denominator());
        for (std::size_t a = 0; a < 9; ++a)
            for (std::size_t b = 0; b < 9; ++b) {
                const Rational& r = p.matrix.table()[a][b];
                sub[a][b] = r.numerator() * (denominator / r.denominator());
            }
    }
};

std::vector<std::size_t> indices(std::string_view s) {
    std::vector<std::size_t> out(s.size());
    std::transform(s.begin(), s.end(), out.begin(), symbol_index);
    return out;
}

} // namespace

ScoreMatrix score_matrix(std::string_view s1, std::string_view s2, const AlignParams& p) {
    const ScaledScores sc(p);
    const auto a = indices(s1);
    const auto b = indices(s2);
    ScoreMatrix m(b.size() + 1, a.size() + 1, sc.denominator);
    for (std::size_t i = 1; i < m.rows(); ++i) {
        for (std::size_t j = 1; j < m.cols(); ++j) {
            const std::int64_t diag = m.scaled(i - 1, j - 1) + sc.sub[a[j - 1]][b[i - 1]];
            const std::int64_t left = m.scaled(i, j - 1) + sc.gap;
            const std::int64_t up = m.scaled(i - 1, j) + sc.gap;
            m.scaled(i, j) = std::max({diag, left, up});
        }
    }
    return m;
}

Rational normalized_score(const Rational& raw, std::size_t len1, std::size_t len2) {
    const std::size_t shorter = std::min(len1, len2);
    if (shorter == 0)
        return Rational(0);
    return raw / Rational(2 * static_cast<std::int64_t>(shorter));
}

AlignmentResult traceback(const ScoreMatrix& m, std::string_view s1, std::string_view s2, const AlignParams& p) {
    if (m.rows() != s2.size() + 1 || m.cols() != s1.size() + 1)
        throw ShapeError("score matrix dimensions do not match the sequences");
    const ScaledScores sc(p);
    if (sc.denominator != m.denominator())
        throw ShapeError("score matrix was built with different scoring parameters");

    AlignmentResult out;
    out.score = m.at(m.rows() - 1, m.cols() - 1);
    out.normalized = normalized_score(out.score, s1.size(), s2.size());
    std::size_t i = m.rows() - 1;
    std::size_t j = m.cols() - 1;
    while (i > 0 && j > 0) {
        const std::int64_t here = m.scaled(i, j);
        if (m.scaled(i - 1, j - 1) + sc.sub[symbol_index(s1[j - 1])][symbol_index(s2[i - 1])] == here) {
            out.path.push_back(Move::diagonal);
            out.aligned1.push_back(s1[--j]);
            out.aligned2.push_back(s2[--i]);
        } else if (m.scaled(i - 1, j) + sc.gap == here) {
            out.path.push_back(Move::up);
            out.aligned1.push_back('-');
            out.aligned2.push_back(s2[--i]);
        } else if (m.scaled(i, j - 1) + sc.gap == here) {
            out.path.push_back(Move::left);
            out.aligned1.push_back(s1[--j]);
            out.aligned2.push_back('-');
        } else {
            throw ShapeError(fmt::format("score matrix cell ({}, {}) has no consistent predecessor", i, j));
        }
    }
    // Free leading overhang from the zero border.
    while (j > 0) {
        out.aligned1.push_back(s1[--j]);
        out.aligned2.push_back('-');
    }
    while (i > 0) {
        out.aligned1.push_back('-');
        out.aligned2.push_back(s2[--i]);
    }
    std::reverse(out.aligned1.begin(), out.aligned1.end());
    std::reverse(out.aligned2.begin(), out.aligned2.end());
    return out;
}

AlignmentResult align_score(std::string_view s1, std::string_view s2, const AlignParams& p) {
    return traceback(score_matrix(s1, s2, p), s1, s2, p);
}

Rational alignment_score(std::string_view s1, std::string_view s2, const AlignParams& p) {
    const ScaledScores sc(p);
    const auto a = indices(s1);
    const auto b = indices(s2);
    std::vector<std::int64_t> prev(a.size() + 1, 0);
    std::vector<std::int64_t> cur(a.size() + 1, 0);
    for (std::size_t i = 1; i <= b.size(); ++i) {
        cur[0] = 0;
        const auto& row = sc.sub[b[i - 1]];
        for (std::size_t j = 1; j <= a.size(); ++j)
            cur[j] = std::max({prev[j - 1] + row[a[j - 1]], cur[j - 1] + sc.gap, prev[j] + sc.gap});
        std::swap(prev, cur);
    }
    return Rational(prev.back(), sc.denominator);
}

void write_score_matrix_tsv(std::ostream& os, const ScoreMatrix& m, std::string_view s1, std::string_view s2,
                            bool exact) {
    os << "\t";
    for (char c : s1)
        os << '\t' << c;
    os << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (i > 0)
            os << s2[i - 1];
        for (std::size_t j = 0; j < m.cols(); ++j)
            os << '\t' << format_rational(m.at(i, j), exact);
        os << '\n';
    }
}

} // namespace shapeseq
