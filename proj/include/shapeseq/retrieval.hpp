#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shapeseq/pipeline.hpp"

namespace shapeseq {

struct ManifestEntry {
    std::string id;
    std::string label;
    std::filesystem::path path;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
};

/// TSV "id<TAB>class<TAB>path"; relative paths resolve against `base_dir`.
/// Blank lines and lines starting with '#' are skipped.
DatasetManifest read_manifest(std::istream& is, const std::filesystem::path& base_dir = {});
DatasetManifest read_manifest(const std::filesystem::path& path);

struct BuildFailure {
    std::string id;
    std::string message;
};

/// Geometry stage output for a batch: one resampled contour per shape.
struct Shape {
    std::string id;
    std::string label;
    Contour contour;
};

struct ShapeSet {
    std::vector<Shape> shapes;
    std::vector<BuildFailure> failures;
};

/// Per-entry failures are collected, never thrown. Throws on an empty
/// manifest or when no entry survives.
ShapeSet load_shapes(const DatasetManifest& manifest, const PipelineConfig& cfg);

struct ShapeRecord {
    std::string id;
    std::string label;
    SymbolString symbols;
    std::size_t point_count = 0;
    bool degenerate = false;
};

/// Parameters every record in an index was encoded under.
struct IndexParams {
    std::size_t n_points = 100;
    int k_angle_bins = 6;
    int threshold = 128;
    Polarity polarity = Polarity::automatic;
    AlignParams align;

    static IndexParams from(const PipelineConfig& cfg);
    friend bool operator==(const IndexParams&, const IndexParams&) = default;
};

struct RetrievalIndex {
    IndexParams params;
    std::vector<ShapeRecord> records;
};

RetrievalIndex build_index(const ShapeSet& shapes, const PipelineConfig& cfg);

struct IndexBuild {
    RetrievalIndex index;
    std::vector<BuildFailure> failures;
};
IndexBuild build_index(const DatasetManifest& manifest, const PipelineConfig& cfg);

void write_index(std::ostream& os, const RetrievalIndex& idx);
RetrievalIndex read_index(std::istream& is);

struct RankedHit {
    std::string id;
    Rational raw;
    Rational normalized;
};
using RankedResult = std::vector<RankedHit>;

/// Best `top_k` records by raw score (ties: shape id ascending), skipping `exclude_id`.
RankedResult query(const RetrievalIndex& idx, const SymbolString& q, std::size_t top_k,
                   const std::optional<std::string>& exclude_id = std::nullopt);

void write_results_tsv(std::ostream& os, const RankedResult& results, bool exact = false);

/// All-pairs raw scores; entry (q, r) scores query q against record r.
class ScoreTable {
public:
    /// Strings-only scoring straight from an index.
    static ScoreTable from_index(const RetrievalIndex& idx);
    /// Shape-context + rigid alignment per ordered pair before string scoring.
    static ScoreTable full_pipeline(const ShapeSet& shapes, const PipelineConfig& cfg);

    std::size_t size() const { return ids_.size(); }
    const std::string& id(std::size_t i) const { return ids_[i]; }
    const std::string& label(std::size_t i) const { return labels_[i]; }
    const Rational& raw(std::size_t q, std::size_t r) const { return raw_[q * ids_.size() + r]; }

    /// Every other record, best first (ties: id ascending).
    std::vector<std::size_t> ranking(std::size_t q) const;

private:
    std::vector<std::string> ids_;
    std::vector<std::string> labels_;
    std::vector<Rational> raw_;
};

/// Mean over queries of the same-class share of each top-k list (query
/// excluded), as a percentage. Queries whose class has one member are skipped.
double retrieval_score(const ScoreTable& table, std::size_t top_k);
double retrieval_score(const RetrievalIndex& idx, std::size_t top_k);

/// Leave-one-out 1-NN accuracy as a percentage, same eligibility rule.
double recognition_score(const ScoreTable& table);
double recognition_score(const RetrievalIndex& idx);

/// Drops round(fraction * N) consecutive points starting at `start` (mod N)
/// and closes the remaining points in their original order.
Contour occlude(const Contour& c, double fraction, std::size_t start);
/// Same, starting at the point opposite the largest-centroid-distance anchor.
Contour occlude(const Contour& c, double fraction);

struct OcclusionTable {
    std::vector<double> fractions;
    std::vector<int> k_values;
    std::vector<std::vector<double>> accuracy; ///< [fraction][k], percentages
};

/// For each k the intact shapes are re-encoded; each occluded query (resampled
/// back to n_points) is classified by its nearest intact neighbour other than itself.
OcclusionTable occlusion_sweep(const ShapeSet& shapes, const std::vector<double>& fractions,
                               const std::vector<int>& k_values, const PipelineConfig& cfg);

void write_occlusion_tsv(std::ostream& os, const OcclusionTable& t);

} // namespace shapeseq
