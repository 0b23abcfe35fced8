#pragma once

#include <iosfwd>

#include "shapeseq/geometry.hpp"
#include "shapeseq/shape_context.hpp"

namespace shapeseq {

/// p -> R(rotation) * p + translation. Rotation is kept in (-pi, pi].
struct RigidTransform {
    double rotation = 0.0;
    Point translation;

    Point apply(Point p) const;
};

struct ProcrustesResult {
    RigidTransform transform;
    Contour aligned;               ///< contour B with the transform applied
    double residual_rms = 0.0;     ///< over the matched pairs, after alignment
    double initial_rms = 0.0;      ///< same pairs, identity transform
    bool degenerate = false;       ///< matched points coincide; rotation left at 0
};

/// Least-squares rotation + translation (no scaling, no reflection) taking
/// the matched points of `b` onto those of `a`. Pairs are equally weighted.
ProcrustesResult align(const Contour& a, const Contour& b, const Correspondence& corr);

/// The trivial correspondence i <-> i over min(|a|, |b|) points.
Correspondence identity_correspondence(std::size_t count);

void write_transform(std::ostream& os, const RigidTransform& t);
RigidTransform read_transform(std::istream& is);

} // namespace shapeseq
