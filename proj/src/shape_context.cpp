#include "shapeseq/shape_context.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

namespace shapeseq {

void BinConfig::validate() const {
    if (radial_bins < 1 || angular_bins < 1)
        throw ShapeError("shape context needs at least one radial and one angular bin");
    if (!(r_inner > 0.0 && r_inner < 1.0))
        throw ShapeError(fmt::format("r_inner must lie in (0, 1), got {}", r_inner));
    if (!(r_outer_scale > 0.0) || !std::isfinite(r_outer_scale))
        throw ShapeError(fmt::format("r_outer_scale must be positive, got {}", r_outer_scale));
}

unsigned Histogram::total() const {
    unsigned sum = 0;
    for (unsigned c : counts)
        sum += c;
    return sum;
}

double mean_pairwise_distance(std::span<const Point> points) {
    if (points.size() < 2)
        return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            sum += distance(points[i], points[j]);
    const double pairs = 0.5 * static_cast<double>(points.size()) * static_cast<double>(points.size() - 1);
    return sum / pairs;
}

Histogram compute_histogram(std::span<const Point> points, std::size_t i, const BinConfig& cfg,
                            double outer_radius) {
    cfg.validate();
    if (i >= points.size())
        throw ShapeError(fmt::format("point index {} out of range ({} points)", i, points.size()));
    if (!(outer_radius > 0.0))
        throw ShapeError("degenerate point set: outer radius is zero");

    Histogram h;
    h.counts.assign(cfg.bin_count(), 0);
    const double log_inner = std::log(cfg.r_inner);
    const auto radial = static_cast<double>(cfg.radial_bins);
    const auto angular = static_cast<double>(cfg.angular_bins);
    const Point origin = points[i];
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (j == i)
            continue;
        const Point d = points[j] - origin;
        const double rho = std::hypot(d.x, d.y) / outer_radius;
        if (rho > 1.0)
            continue;
        std::size_t rbin = 0;
        if (rho > cfg.r_inner) {
            // 0 at the inner edge, 1 at the outer radius.
            const double u = 1.0 - std::log(rho) / log_inner;
            rbin = std::min(static_cast<std::size_t>(u * radial), cfg.radial_bins - 1);
        }
        double theta = std::atan2(d.y, d.x);
        if (theta < 0.0)
            theta += 2.0 * std::numbers::pi;
        const auto abin =
            std::min(static_cast<std::size_t>(theta * angular / (2.0 * std::numbers::pi)), cfg.angular_bins - 1);
        ++h.counts[rbin * cfg.angular_bins + abin];
    }
    return h;
}

Histogram compute_histogram(std::span<const Point> points, std::size_t i, const BinConfig& cfg) {
    return compute_histogram(points, i, cfg, cfg.r_outer_scale * mean_pairwise_distance(points));
}

ShapeContextDescriptor descriptor(std::span<const Point> points, const BinConfig& cfg) {
    cfg.validate();
    ShapeContextDescriptor d;
    d.config = cfg;
    d.outer_radius = cfg.r_outer_scale * mean_pairwise_distance(points);
    d.histograms.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        d.histograms.push_back(compute_histogram(points, i, cfg, d.outer_radius));
    return d;
}

double match_cost(const Histogram& a, const Histogram& b) {
    if (a.counts.size() != b.counts.size())
        throw ShapeError(fmt::format("histogram bin counts differ ({} vs {})", a.counts.size(), b.counts.size()));
    const double ta = a.total();
    const double tb = b.total();
    double sum = 0.0;
    for (std::size_t k = 0; k < a.counts.size(); ++k) {
        const double ha = ta > 0 ? a.counts[k] / ta : 0.0;
        const double hb = tb > 0 ? b.counts[k] / tb : 0.0;
        const double denom = ha + hb;
        if (denom > 0.0)
            sum += (ha - hb) * (ha - hb) / denom;
    }
    return 0.5 * sum;
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

CostMatrix CostMatrix::transposed() const {
    CostMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            t(j, i) = (*this)(i, j);
    return t;
}

CostMatrix cost_matrix(const ShapeContextDescriptor& a, const ShapeContextDescriptor& b) {
    if (!(a.config == b.config))
        throw ShapeError("descriptors were built with different bin configurations");
    CostMatrix m(a.histograms.size(), b.histograms.size());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            m(i, j) = match_cost(a.histograms[i], b.histograms[j]);
    return m;
}

namespace {

// Suffix costs for one rotation of B: table(i, j) = best cost of aligning
// A[i..n) against rotated B[j..m).
CostMatrix suffix_costs(const CostMatrix& m, std::size_t offset, double skip) {
    const std::size_t n = m.rows();
    const std::size_t cols = m.cols();
    CostMatrix table(n + 1, cols + 1);
    for (std::size_t i = n + 1; i-- > 0;) {
        for (std::size_t j = cols + 1; j-- > 0;) {
            if (i == n && j == cols)
                continue;
            double best = std::numeric_limits<double>::infinity();
            if (i < n && j < cols)
                best = m(i, (j + offset) % cols) + table(i + 1, j + 1);
            if (i < n)
                best = std::min(best, skip + table(i + 1, j));
            if (j < cols)
                best = std::min(best, skip + table(i, j + 1));
            table(i, j) = best;
        }
    }
    return table;
}

} // namespace

Correspondence correspond(const CostMatrix& m, double skip_penalty) {
    if (m.rows() == 0 || m.cols() == 0)
        throw ShapeError("cannot correspond an empty cost matrix");
    if (!(skip_penalty >= 0.0))
        throw ShapeError("skip penalty must be non-negative");

    std::size_t best_offset = 0;
    CostMatrix best = suffix_costs(m, 0, skip_penalty);
    for (std::size_t r = 1; r < m.cols(); ++r) {
        CostMatrix table = suffix_costs(m, r, skip_penalty);
        if (table(0, 0) < best(0, 0)) {
            best = std::move(table);
            best_offset = r;
        }
    }

    Correspondence out;
    out.offset = best_offset;
    out.total_cost = best(0, 0);
    const std::size_t n = m.rows();
    const std::size_t cols = m.cols();
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n || j < cols) {
        const double here = best(i, j);
        if (i < n && j < cols) {
            const std::size_t bj = (j + best_offset) % cols;
            if (m(i, bj) + best(i + 1, j + 1) == here) {
                out.pairs.push_back({i, bj});
                ++i;
                ++j;
                continue;
            }
        }
        if (i < n && skip_penalty + best(i + 1, j) == here) {
            ++i;
            continue;
        }
        ++j;
    }
    return out;
}

void write_descriptor(std::ostream& os, const ShapeContextDescriptor& d) {
    os << "SC " << d.histograms.size() << ' ' << d.config.radial_bins << ' ' << d.config.angular_bins << '\n';
    for (const Histogram& h : d.histograms) {
        for (std::size_t k = 0; k < h.counts.size(); ++k)
            os << (k ? " " : "") << h.counts[k];
        os << '\n';
    }
}

void write_cost_matrix_tsv(std::ostream& os, const CostMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j)
            os << (j ? "\t" : "") << fmt::format("{}", m(i, j));
        os << '\n';
    }
}

} // namespace shapeseq
