#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shapeseq/alphabet.hpp"
#include "shapeseq/geometry.hpp"

namespace shapeseq {

/// One step of the centroid-anchored walk: a pair of contour points, their
/// distances from the centroid G and the angle x G y in [0, pi].
struct State {
    Point x_point;
    Point y_point;
    std::size_t x_index = 0;
    std::size_t y_index = 0;
    double x_dist = 0.0;
    double y_dist = 0.0;
    double angle = 0.0;
};

struct QuantizationConfig {
    int k_angle_bins = 6;
    /// Size-bin range; both default to the encoded contour's own extremes.
    std::optional<double> d_min;
    std::optional<double> d_max;

    void validate() const;
};

/// Resolved range passed to quantize_distance.
struct DistanceRange {
    double d_min = 0.0;
    double d_max = 1.0;
};

/// Encoded shape: one (angle, x-size, y-size) triple per state.
class SymbolString {
public:
    SymbolString() = default;
    /// Throws ShapeError unless `symbols` is a sequence of valid triples.
    explicit SymbolString(std::string symbols);

    const std::string& str() const { return symbols_; }
    std::size_t size() const { return symbols_.size(); }
    std::size_t state_count() const { return symbols_.size() / 3; }
    bool empty() const { return symbols_.empty(); }

    friend bool operator==(const SymbolString&, const SymbolString&) = default;

private:
    std::string symbols_;
};

struct Encoding {
    SymbolString symbols;
    std::vector<State> states;
    bool degenerate = false; ///< centroid distances all (nearly) equal
};

/// Anchors: x_1 at the largest centroid distance, y_1 at the smallest,
/// lowest index on ties. `degenerate` reports D_max ~ D_min.
State initial_state(const Contour& c, bool* degenerate = nullptr);

/// x and y advance together one contour index per state, keeping the
/// index gap established by initial_state. Returns exactly c.size() states.
std::vector<State> states(const Contour& c);

/// Non-reflex angle a G b; 0 when either point sits on G.
double subtended_angle(Point a, Point g, Point b);

char quantize_distance(double d, const DistanceRange& range);
char quantize_angle(double angle, int k);

Encoding encode(const Contour& c, const QuantizationConfig& cfg = {});

} // namespace shapeseq
