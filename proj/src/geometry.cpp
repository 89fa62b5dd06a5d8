#include "mcplan/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace mcplan {

Pose2 Pose2::inverse() const {
  const double c = std::cos(theta), s = std::sin(theta);
  // R^T * (-p)
  return Pose2{-(c * x + s * y), -(-s * x + c * y), -theta};
}

double Pose2::wrap_angle(double a) {
  double w = std::fmod(a, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  if (w > M_PI) w -= 2.0 * M_PI;
  return w;
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const Vec2 p = a.apply(Vec2(b.x, b.y));
  return Pose2{p.x(), p.y(), a.theta + b.theta};
}

void PegShape::validate() const {
  if (!(half_width > 0.0) || !(half_height > 0.0))
    throw std::invalid_argument("peg half_width and half_height must be positive");
  std::vector<Prong> sorted = prongs;
  std::sort(sorted.begin(), sorted.end(),
            [](const Prong& a, const Prong& b) { return a.offset < b.offset; });
  double prev_right = -half_width - 1.0;
  for (const Prong& p : sorted) {
    if (!(p.width > 0.0) || !(p.length > 0.0))
      throw std::invalid_argument("prong width and length must be positive");
    const double left = p.offset - 0.5 * p.width;
    const double right = p.offset + 0.5 * p.width;
    if (left < -half_width || right > half_width)
      throw std::invalid_argument("prong extends beyond the peg body");
    if (left < prev_right) throw std::invalid_argument("prongs overlap");
    prev_right = right;
  }
}

std::vector<Vec2> PegShape::outline() const {
  std::vector<Prong> sorted = prongs;
  std::sort(sorted.begin(), sorted.end(),
            [](const Prong& a, const Prong& b) { return a.offset < b.offset; });
  const double r = half_width, h = half_height;
  std::vector<Vec2> pts;
  pts.emplace_back(-r, -h);
  for (const Prong& p : sorted) {
    const double left = p.offset - 0.5 * p.width;
    const double right = p.offset + 0.5 * p.width;
    pts.emplace_back(left, -h);
    pts.emplace_back(left, -h - p.length);
    pts.emplace_back(right, -h - p.length);
    pts.emplace_back(right, -h);
  }
  pts.emplace_back(r, -h);
  pts.emplace_back(r, h);
  pts.emplace_back(-r, h);
  // drop consecutive duplicates (prong flush with a body corner)
  std::vector<Vec2> out;
  for (const Vec2& p : pts) {
    if (out.empty() || (out.back() - p).norm() > 1e-15) out.push_back(p);
  }
  return out;
}

double PegShape::tip_y() const {
  double y = -half_height;
  for (const Prong& p : prongs) y = std::min(y, -half_height - p.length);
  return y;
}

void HoleShape::validate() const {
  if (holes.empty()) throw std::invalid_argument("hole shape needs at least one entry");
  for (const HoleEntry& h : holes) {
    if (!(h.width > 0.0) || !(h.depth > 0.0))
      throw std::invalid_argument("hole width and depth must be positive");
    if (h.chamfer_width < 0.0) throw std::invalid_argument("chamfer width must be >= 0");
    if (!(h.chamfer_angle > 0.0) || !(h.chamfer_angle < M_PI / 2.0))
      throw std::invalid_argument("chamfer angle must lie in (0, pi/2)");
  }
}

const char* surface_name(SurfaceId id) {
  switch (id) {
    case SurfaceId::LeftWall: return "left_wall";
    case SurfaceId::RightWall: return "right_wall";
    case SurfaceId::ChamferLeft: return "chamfer_left";
    case SurfaceId::ChamferRight: return "chamfer_right";
    case SurfaceId::Floor: return "floor";
    case SurfaceId::TopFace: return "top_face";
  }
  return "unknown";
}

std::pair<Vec2, Vec2> handle_contact_points(const PegShape& peg, const Pose2& z) {
  return {z.apply(Vec2(-peg.half_width, 0.0)), z.apply(Vec2(peg.half_width, 0.0))};
}

std::vector<Vec2> boundary_samples(const PegShape& peg, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("contact sample spacing must be positive");
  const std::vector<Vec2> poly = peg.outline();
  std::vector<Vec2> pts;
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const double len = (b - a).norm();
    const int divisions = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    for (int k = 0; k < divisions; ++k) {
      pts.push_back(a + (static_cast<double>(k) / divisions) * (b - a));
    }
  }
  return pts;
}

namespace {

// boundary segments walked from the left mouth lip down, across, and up
struct CavityEdge {
  Vec2 a, b;
  SurfaceId surface;
};

int cavity_edges(const HoleEntry& h, CavityEdge out[5]) {
  const double o = h.offset, w2 = 0.5 * h.width, d = h.depth;
  const double cw = h.chamfer_width, cd = h.chamfer_depth();
  const Vec2 A(o - w2 - cw, 0.0), B(o - w2, -cd), C(o - w2, -d);
  const Vec2 D(o + w2, -d), E(o + w2, -cd), F(o + w2 + cw, 0.0);
  int n = 0;
  if (cw > 0.0) out[n++] = {A, B, SurfaceId::ChamferLeft};
  out[n++] = {B, C, SurfaceId::LeftWall};
  out[n++] = {C, D, SurfaceId::Floor};
  out[n++] = {D, E, SurfaceId::RightWall};
  if (cw > 0.0) out[n++] = {E, F, SurfaceId::ChamferRight};
  return n;
}

bool inside_cavity(const HoleEntry& h, const Vec2& p) {
  const double y = p.y();
  if (y >= 0.0 || y < -h.depth) return false;
  const double dx = std::abs(p.x() - h.offset);
  double half = 0.5 * h.width;
  const double cd = h.chamfer_depth();
  if (h.chamfer_width > 0.0 && y > -cd) {
    half += h.chamfer_width * (1.0 + y / cd);
  }
  return dx <= half;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, Vec2* closest,
                              bool* at_vertex = nullptr) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  const double tc = std::clamp(t, 0.0, 1.0);
  if (at_vertex) *at_vertex = tc != t || len2 == 0.0;
  *closest = a + tc * ab;
  return (p - *closest).norm();
}

}  // namespace

bool probe_environment(const HoleShape& hole, const Vec2& p_world, SurfaceHit* hit) {
  const Pose2 inv = hole.mouth_center.inverse();
  const Vec2 p = inv.apply(p_world);
  if (p.y() >= 0.0) return false;
  for (const HoleEntry& h : hole.holes) {
    if (inside_cavity(h, p)) return false;
  }
  // in material: penetration is the distance to the nearest free-space surface
  double best = -p.y();
  Vec2 best_normal(0.0, 1.0);
  SurfaceId best_surface = SurfaceId::TopFace;
  int best_hole = -1;
  bool best_vertex = false;
  CavityEdge edges[5];
  for (size_t i = 0; i < hole.holes.size(); ++i) {
    const int n_edges = cavity_edges(hole.holes[i], edges);
    for (int k = 0; k < n_edges; ++k) {
      const CavityEdge& e = edges[k];
      Vec2 closest;
      bool at_vertex = false;
      const double d = point_segment_distance(p, e.a, e.b, &closest, &at_vertex);
      const bool closer =
          d < best - 1e-15 ||
          (d <= best + 1e-15 && static_cast<int>(e.surface) < static_cast<int>(best_surface));
      if (!closer) continue;
      best = d;
      best_surface = e.surface;
      best_hole = static_cast<int>(i);
      best_vertex = at_vertex;
      if (d > 1e-12) {
        best_normal = (closest - p) / d;
      } else {
        // on the surface: use the edge normal on the free side
        Vec2 t = (e.b - e.a).normalized();
        Vec2 n(t.y(), -t.x());
        // the cavity interior lies left of the walk direction for our ordering
        Vec2 mid = 0.5 * (e.a + e.b);
        if (inside_cavity(hole.holes[i], mid + 1e-9 * Vec2(-t.y(), t.x()))) n = -n;
        best_normal = n;
      }
    }
  }
  if (hit) {
    hit->penetration = best;
    hit->normal_world = hole.mouth_center.rotate(best_normal);
    hit->surface = best_surface;
    hit->hole_index = best_hole;
    hit->at_vertex = best_vertex;
  }
  return true;
}

bool near_material(const HoleShape& hole, const Vec2& p_world, double margin) {
  const Pose2 inv = hole.mouth_center.inverse();
  const Vec2 p = inv.apply(p_world);
  if (p.y() >= margin) return false;
  if (p.y() >= 0.0) return true;  // within margin of the top-face plane
  bool free_point = false;
  for (const HoleEntry& h : hole.holes) {
    if (inside_cavity(h, p)) {
      free_point = true;
      break;
    }
  }
  if (!free_point) return true;  // in material
  CavityEdge edges[5];
  for (const HoleEntry& h : hole.holes) {
    const int n_edges = cavity_edges(h, edges);
    for (int k = 0; k < n_edges; ++k) {
      Vec2 closest;
      if (point_segment_distance(p, edges[k].a, edges[k].b, &closest) < margin) return true;
    }
  }
  return false;
}

std::vector<ContactRecord> environment_contacts(const PegShape& peg, const HoleShape& hole,
                                                const Pose2& z, double spacing, double mu_env) {
  return environment_contacts(boundary_samples(peg, spacing), hole, z, mu_env);
}

std::vector<ContactRecord> environment_contacts(const std::vector<Vec2>& boundary,
                                                const HoleShape& hole, const Pose2& z,
                                                double mu_env) {
  std::vector<ContactRecord> out;
  for (const Vec2& bp : boundary) {
    const Vec2 p = z.apply(bp);
    SurfaceHit hit;
    if (!probe_environment(hole, p, &hit)) continue;
    if (!(hit.penetration > 0.0)) continue;
    out.push_back(ContactRecord{p, hit.normal_world, hit.penetration, hit.surface,
                                hit.hole_index, mu_env});
  }
  std::sort(out.begin(), out.end(), [](const ContactRecord& a, const ContactRecord& b) {
    if (a.surface != b.surface) return static_cast<int>(a.surface) < static_cast<int>(b.surface);
    if (a.point.x() != b.point.x()) return a.point.x() < b.point.x();
    return a.point.y() < b.point.y();
  });
  return out;
}

}  // namespace mcplan
