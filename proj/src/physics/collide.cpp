#include "physics/collide.hpp"

#include <algorithm>

namespace ql::phys {

namespace {

// Sutherland-Hodgman clip of a polygon against the half-plane dot(n, x) - d <= 0
void clip_halfplane(std::vector<Vec2>& poly, const Vec2& n, double d) {
  if (poly.empty()) return;
  std::vector<Vec2> out;
  out.reserve(poly.size() + 1);
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    const double dp = n.dot(p) - d;
    const double dq = n.dot(q) - d;
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
      const double t = dp / (dp - dq);
      out.push_back(p + t * (q - p));
    }
  }
  poly.swap(out);
}

}  // namespace

std::vector<ContactPoint> collide_polygon_segment(const Body& body, int body_id,
                                                  const Segment& seg, int seg_id) {
  const Vec2 n = seg.normal();
  const Vec2 tangent = (seg.b - seg.a).normalized();

  std::vector<Vec2> poly;
  poly.reserve(body.shape.verts.size());
  for (const Vec2& v : body.shape.verts) poly.push_back(body.to_world(v));

  // clip to the strip perpendicular to the segment endpoints
  clip_halfplane(poly, -tangent, -tangent.dot(seg.a));
  clip_halfplane(poly, tangent, tangent.dot(seg.b));
  if (poly.empty()) return {};

  struct Cand {
    Vec2 p;
    double depth;
  };
  std::vector<Cand> cands;
  const double line_d = n.dot(seg.a);
  for (const Vec2& p : poly) {
    const double depth = line_d - n.dot(p);  // > 0 below the line
    if (depth >= 0.0) cands.push_back({p, depth});
  }
  if (cands.empty()) return {};

  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& a, const Cand& b) { return a.depth > b.depth; });
  if (cands.size() > 2) cands.resize(2);

  std::vector<ContactPoint> out;
  for (const Cand& c : cands) {
    ContactPoint cp;
    cp.body = body_id;
    cp.segment = seg_id;
    cp.point = c.p;
    cp.normal = n;
    cp.penetration = c.depth;
    cp.friction = std::sqrt(body.friction * seg.friction);
    out.push_back(cp);
  }
  return out;
}

std::optional<double> ray_segment(const Vec2& origin, const Vec2& dir, const Segment& seg) {
  const Vec2 d = seg.b - seg.a;
  const double denom = cross2(dir, d);
  if (std::abs(denom) < 1e-14) return std::nullopt;  // parallel
  const Vec2 ao = seg.a - origin;
  const double t = cross2(ao, d) / denom;  // along the ray
  const double u = cross2(ao, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

}  // namespace ql::phys
