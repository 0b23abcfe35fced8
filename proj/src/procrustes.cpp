#include "shapeseq/procrustes.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include <fmt/format.h>

namespace shapeseq {

Point RigidTransform::apply(Point p) const {
    const double c = std::cos(rotation);
    const double s = std::sin(rotation);
    return {c * p.x - s * p.y + translation.x, s * p.x + c * p.y + translation.y};
}

Correspondence identity_correspondence(std::size_t count) {
    Correspondence corr;
    corr.pairs.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        corr.pairs.push_back({i, i});
    return corr;
}

namespace {

double rms(const Contour& a, const Contour& b, const Correspondence& corr, const RigidTransform& t) {
    double sum = 0.0;
    for (const auto& [i, j] : corr.pairs) {
        const Point d = a[i] - t.apply(b[j]);
        sum += d.x * d.x + d.y * d.y;
    }
    return std::sqrt(sum / static_cast<double>(corr.pairs.size()));
}

} // namespace

ProcrustesResult align(const Contour& a, const Contour& b, const Correspondence& corr) {
    if (corr.pairs.size() < 2)
        throw ShapeError(fmt::format("alignment needs at least 2 matched pairs, got {}", corr.pairs.size()));
    for (const auto& [i, j] : corr.pairs)
        if (i >= a.size() || j >= b.size())
            throw ShapeError("correspondence index out of range");

    const auto count = static_cast<double>(corr.pairs.size());
    Point ca;
    Point cb;
    for (const auto& [i, j] : corr.pairs) {
        ca = ca + a[i];
        cb = cb + b[j];
    }
    ca = (1.0 / count) * ca;
    cb = (1.0 / count) * cb;

    // In 2-D the optimal proper rotation is atan2 of the summed cross and dot
    // products of the centred pairs.
    double dot = 0.0;
    double cross = 0.0;
    double spread_a = 0.0;
    double spread_b = 0.0;
    for (const auto& [i, j] : corr.pairs) {
        const Point pa = a[i] - ca;
        const Point pb = b[j] - cb;
        dot += pb.x * pa.x + pb.y * pa.y;
        cross += pb.x * pa.y - pb.y * pa.x;
        spread_a += pa.x * pa.x + pa.y * pa.y;
        spread_b += pb.x * pb.x + pb.y * pb.y;
    }

    ProcrustesResult out{.transform = {}, .aligned = b};
    out.degenerate = spread_a == 0.0 || spread_b == 0.0;
    double theta = out.degenerate ? 0.0 : std::atan2(cross, dot);
    if (theta <= -std::numbers::pi)
        theta += 2.0 * std::numbers::pi;
    out.transform.rotation = theta;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    out.transform.translation = {ca.x - (c * cb.x - s * cb.y), ca.y - (s * cb.x + c * cb.y)};

    std::vector<Point> moved;
    moved.reserve(b.size());
    for (const Point& p : b.points())
        moved.push_back(out.transform.apply(p));
    out.aligned = Contour(std::move(moved));
    out.residual_rms = rms(a, b, corr, out.transform);
    out.initial_rms = rms(a, b, corr, RigidTransform{});
    return out;
}

void write_transform(std::ostream& os, const RigidTransform& t) {
    os << fmt::format("R {} T {} {}\n", t.rotation, t.translation.x, t.translation.y);
}

RigidTransform read_transform(std::istream& is) {
    std::string r;
    std::string tt;
    RigidTransform t;
    if (!(is >> r >> t.rotation >> tt >> t.translation.x >> t.translation.y) || r != "R" || tt != "T")
        throw ShapeError("transform line must read 'R <radians> T <dx> <dy>'");
    return t;
}

} // namespace shapeseq
