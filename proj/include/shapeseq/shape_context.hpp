#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "shapeseq/geometry.hpp"

namespace shapeseq {

/// Log-polar binning. Radii are measured in units of the outer radius
/// `r_outer_scale * mean pairwise distance`; radial edges are geometric
/// between `r_inner` and 1. Points beyond the outer radius are dropped.
struct BinConfig {
    std::size_t radial_bins = 5;
    std::size_t angular_bins = 12;
    double r_inner = 0.125;
    double r_outer_scale = 2.0;

    std::size_t bin_count() const { return radial_bins * angular_bins; }
    void validate() const;
    friend bool operator==(const BinConfig&, const BinConfig&) = default;
};

/// Raw counts; bin index = radial * angular_bins + angular.
struct Histogram {
    std::vector<unsigned> counts;

    unsigned total() const;
    friend bool operator==(const Histogram&, const Histogram&) = default;
};

struct ShapeContextDescriptor {
    std::vector<Histogram> histograms;
    BinConfig config;
    double outer_radius = 0.0;
};

double mean_pairwise_distance(std::span<const Point> points);

/// Shape context of points[i] against an explicit outer radius.
Histogram compute_histogram(std::span<const Point> points, std::size_t i, const BinConfig& cfg,
                            double outer_radius);
/// Same, with the outer radius derived from the whole point set.
Histogram compute_histogram(std::span<const Point> points, std::size_t i, const BinConfig& cfg);

ShapeContextDescriptor descriptor(std::span<const Point> points, const BinConfig& cfg = {});
inline ShapeContextDescriptor descriptor(const Contour& c, const BinConfig& cfg = {}) {
    return descriptor(c.points(), cfg);
}

/// Chi-square distance between the two histograms after normalising each to unit mass.
double match_cost(const Histogram& a, const Histogram& b);

class CostMatrix {
public:
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    CostMatrix transposed() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

CostMatrix cost_matrix(const ShapeContextDescriptor& a, const ShapeContextDescriptor& b);

struct Correspondence {
    struct Pair {
        std::size_t a;
        std::size_t b;
        friend bool operator==(const Pair&, const Pair&) = default;
    };
    std::vector<Pair> pairs;
    std::size_t offset = 0; ///< rotation applied to contour B's indices
    double total_cost = 0.0;
};

/// Minimum-cost order-preserving cyclic matching. Each of the `cols`
/// rotations of B is aligned monotonically against A; a skipped point on
/// either side costs `skip_penalty`. Ties keep the lowest offset, and within
/// an offset prefer match, then skipping A, then skipping B, from the front.
Correspondence correspond(const CostMatrix& m, double skip_penalty = 0.3);

void write_descriptor(std::ostream& os, const ShapeContextDescriptor& d);
void write_cost_matrix_tsv(std::ostream& os, const CostMatrix& m);

} // namespace shapeseq
