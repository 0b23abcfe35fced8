#include "shapeseq/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace shapeseq {

namespace {

constexpr double kDegenerateRelTol = 1e-9;

} // namespace

void QuantizationConfig::validate() const {
    if (k_angle_bins < 2 || k_angle_bins > static_cast<int>(kAngleSymbols.size()))
        throw ShapeError(fmt::format("angle bin count must be in [2, 6], got {}", k_angle_bins));
    if (d_min && d_max && !(*d_min < *d_max))
        throw ShapeError("distance range needs d_min < d_max");
}

SymbolString::SymbolString(std::string symbols) : symbols_(std::move(symbols)) {
    if (symbols_.size() % 3 != 0)
        throw ShapeError(fmt::format("symbol string length {} is not a multiple of 3", symbols_.size()));
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        const std::string_view allowed = i % 3 == 0 ? kAngleSymbols : kSizeSymbols;
        if (allowed.find(symbols_[i]) == std::string_view::npos)
            throw ShapeError(fmt::format("symbol '{}' at position {} is not a valid {} symbol", symbols_[i], i,
                                         i % 3 == 0 ? "angle" : "size"));
    }
}

double subtended_angle(Point a, Point g, Point b) {
    const Point u = a - g;
    const Point v = b - g;
    const double cross = u.x * v.y - u.y * v.x;
    const double dot = u.x * v.x + u.y * v.y;
    if ((u.x == 0.0 && u.y == 0.0) || (v.x == 0.0 && v.y == 0.0))
        return 0.0;
    return std::atan2(std::abs(cross), dot);
}

State initial_state(const Contour& c, bool* degenerate) {
    const Point g = centroid(c);
    std::size_t imax = 0;
    std::size_t imin = 0;
    double dmax = distance(c[0], g);
    double dmin = dmax;
    for (std::size_t i = 1; i < c.size(); ++i) {
        const double d = distance(c[i], g);
        if (d > dmax) {
            dmax = d;
            imax = i;
        }
        if (d < dmin) {
            dmin = d;
            imin = i;
        }
    }
    if (degenerate)
        *degenerate = dmax - dmin < kDegenerateRelTol * dmax;
    return State{c[imax], c[imin], imax, imin, dmax, dmin, subtended_angle(c[imax], g, c[imin])};
}

std::vector<State> states(const Contour& c) {
    const Point g = centroid(c);
    const State first = initial_state(c);
    std::vector<State> out;
    out.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const std::size_t xi = (first.x_index + i) % c.size();
        const std::size_t yi = (first.y_index + i) % c.size();
        out.push_back(State{c[xi], c[yi], xi, yi, distance(c[xi], g), distance(c[yi], g),
                            subtended_angle(c[xi], g, c[yi])});
    }
    return out;
}

char quantize_distance(double d, const DistanceRange& range) {
    const double width = range.d_max - range.d_min;
    if (!(width > 0.0))
        return 'M';
    const double t = (std::clamp(d, range.d_min, range.d_max) - range.d_min) / width;
    if (t < 1.0 / 3.0)
        return 'S';
    if (t < 2.0 / 3.0)
        return 'M';
    return 'L';
}

char quantize_angle(double angle, int k) {
    if (k < 2 || k > static_cast<int>(kAngleSymbols.size()))
        throw ShapeError(fmt::format("angle bin count must be in [2, 6], got {}", k));
    if (!(angle >= 0.0 && angle <= std::numbers::pi))
        throw ShapeError(fmt::format("angle {} outside [0, pi]", angle));
    const int bin = std::min(static_cast<int>(angle * k / std::numbers::pi), k - 1);
    return kAngleSymbols[static_cast<std::size_t>(bin)];
}

Encoding encode(const Contour& c, const QuantizationConfig& cfg) {
    cfg.validate();
    Encoding out;
    initial_state(c, &out.degenerate);
    out.states = states(c);

    DistanceRange range{out.states.front().y_dist, out.states.front().x_dist};
    if (cfg.d_min)
        range.d_min = *cfg.d_min;
    if (cfg.d_max)
        range.d_max = *cfg.d_max;

    std::string symbols;
    symbols.reserve(3 * out.states.size());
    for (const State& s : out.states) {
        symbols.push_back(quantize_angle(s.angle, cfg.k_angle_bins));
        if (out.degenerate) {
            symbols.append("MM");
        } else {
            symbols.push_back(quantize_distance(s.x_dist, range));
            symbols.push_back(quantize_distance(s.y_dist, range));
        }
    }
    out.symbols = SymbolString(std::move(symbols));
    return out;
}

} // namespace shapeseq
