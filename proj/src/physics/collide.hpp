#pragma once

#include <optional>

#include "physics/types.hpp"

namespace ql::phys {

// Contact manifold between a dynamic body's polygon and a one-sided terrain
// segment: the polygon is clipped to the segment span, vertices of the clipped
// region lying behind the segment line become contact candidates (the two
// deepest are kept).
std::vector<ContactPoint> collide_polygon_segment(const Body& body, int body_id,
                                                  const Segment& seg, int seg_id);

// Parametric ray-segment intersection; returns distance along the ray
// direction (unit) or nothing on a miss.
std::optional<double> ray_segment(const Vec2& origin, const Vec2& dir, const Segment& seg);

}  // namespace ql::phys
