#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

namespace mcplan {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Planar rigid transform (SE(2)). theta is stored unwrapped so rollouts can
/// track continuous rotations; use wrap_angle when comparing orientations.
struct Pose2 {
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  Vec2 translation() const { return Vec2(x, y); }
  Vec2 rotate(const Vec2& v) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
  }
  Vec2 apply(const Vec2& p) const { return rotate(p) + translation(); }

  Pose2 inverse() const;

  /// Maps any angle to (-pi, pi].
  static double wrap_angle(double a);
};

/// T_a * T_b.
Pose2 compose(const Pose2& a, const Pose2& b);

/// Rectangular protrusion extending downward from the peg's bottom face.
struct Prong {
  double offset{0.0};  // center along peg x-axis [m]
  double width{0.0};   // [m]
  double length{0.0};  // extension below the body [m]
};

/// Rigid peg body: a rectangle with optional prongs on the bottom face.
/// The handle attachment points sit at (-half_width, 0) and (half_width, 0).
struct PegShape {
  double half_width{0.0375};
  double half_height{0.0375};
  std::vector<Prong> prongs;  // empty means single rectangular peg

  void validate() const;  // throws std::invalid_argument on bad shape
  /// CCW boundary polygon in the body frame.
  std::vector<Vec2> outline() const;
  /// Lowest body-frame y over the boundary (tip of the deepest prong).
  double tip_y() const;
  double width() const { return 2.0 * half_width; }
};

/// One cavity in the plate. The plate occupies y <= 0 in the plate frame;
/// the cavity is a rectangle of `width` x `depth` below the mouth, widened
/// near the mouth by chamfer wedges.
struct HoleEntry {
  double offset{0.0};         // mouth center along plate x-axis [m]
  double width{0.076};        // [m]
  double depth{0.03};         // [m]
  double chamfer_width{0.0};  // horizontal extent of the chamfer cut [m]
  double chamfer_angle{M_PI / 4.0};  // measured from the top face

  double chamfer_depth() const {
    return chamfer_width > 0.0 ? chamfer_width * std::tan(chamfer_angle) : 0.0;
  }
};

struct HoleShape {
  Pose2 mouth_center;            // plate frame {H}; top face is y = 0
  std::vector<HoleEntry> holes;  // one entry for the plain task, two for MMPiH

  void validate() const;
  const HoleEntry& primary() const { return holes.front(); }
};

enum class SurfaceId : int {
  LeftWall = 0,
  RightWall = 1,
  ChamferLeft = 2,
  ChamferRight = 3,
  Floor = 4,
  TopFace = 5,
};

const char* surface_name(SurfaceId id);

struct ContactRecord {
  Vec2 point;          // world frame [m]
  Vec2 normal;         // unit, points out of the environment material
  double penetration{0.0};
  SurfaceId surface{SurfaceId::TopFace};
  int hole_index{-1};  // -1 for the top face
  double mu{0.0};
};

/// World-frame handle attachment points c1, c2 for a peg at pose z.
std::pair<Vec2, Vec2> handle_contact_points(const PegShape& peg, const Pose2& z);

/// Boundary sample points in the body frame: polygon vertices plus edge
/// samples at most `spacing` apart.
std::vector<Vec2> boundary_samples(const PegShape& peg, double spacing);

struct SurfaceHit {
  double penetration{0.0};
  Vec2 normal_world{0.0, 1.0};
  SurfaceId surface{SurfaceId::TopFace};
  int hole_index{-1};
  bool at_vertex{false};  // closest free-space feature is a cavity corner
};

/// Penetration query for a single world point against the plate material.
/// Returns false when the point is in free space.
bool probe_environment(const HoleShape& hole, const Vec2& p_world, SurfaceHit* hit);

/// True when the point is in the material or within `margin` of it
/// (conservative; used to prune contact candidates before differencing).
bool near_material(const HoleShape& hole, const Vec2& p_world, double margin);

/// Contact records for every penetrating boundary sample of the peg,
/// sorted by surface id then point for determinism.
std::vector<ContactRecord> environment_contacts(const PegShape& peg, const HoleShape& hole,
                                                const Pose2& z, double spacing, double mu_env);

/// Same, over precomputed body-frame boundary samples (no re-sampling).
std::vector<ContactRecord> environment_contacts(const std::vector<Vec2>& boundary,
                                                const HoleShape& hole, const Pose2& z,
                                                double mu_env);

}  // namespace mcplan
