#pragma once

#include <vector>

#include "mcplan/costs.hpp"
#include "mcplan/geometry.hpp"

namespace mcplan {

struct Stiffness {
  double k_c{100.0};    // controller spring stiffness [N/m], isotropic diagonal
  double k_pen{1e5};    // contact penalty stiffness [N/m]
  double k_t{1e4};      // reference translational stiffness [N/m]
  double k_r{10.0};     // reference rotational stiffness [N*m/rad]

  Vec3 reference_diag() const { return Vec3(k_t, k_t, k_r); }
};

struct SolverOptions {
  double tolerance{1e-8};      // weighted gradient norm [N]
  int max_iterations{200};
  double rot_norm_scale{0.01}; // [m] converts N*m gradient entries to N
};

/// Everything the simulator needs about the scene: bodies, stiffnesses,
/// friction coefficients, and contact sampling.
struct WorldConfig {
  PegShape peg;
  HoleShape hole;
  Stiffness stiffness;
  double mu_handle{0.6};
  double mu_env{0.6};
  double contact_spacing{1e-3};
  SolverOptions solver;

  /// Precomputed boundary samples; call finalize() before parallel use.
  std::vector<Vec2> boundary_pts;
  void finalize();
  const std::vector<Vec2>& boundary() const;
};

struct ControlPair {
  Vec2 u1{0.0, 0.0};
  Vec2 u2{0.0, 0.0};
};

struct EquilibriumResult {
  Pose2 z_star;
  bool converged{false};
  double grad_norm{0.0};
  Mat3 hessian{Mat3::Zero()};
  double det_scaled{0.0};  // det(H K0^-1)
  std::vector<ContactRecord> contacts;
  int multiplicity_branch{0};
};

/// Time-indexed rollout record; all sequences share the same length.
struct Trajectory {
  std::vector<double> times;
  std::vector<ControlPair> controls;
  std::vector<Pose2> states;
  std::vector<EquilibriumResult> equilibria;
  std::vector<CostSample> cost_samples;
  std::vector<uint8_t> slip_flags;
  std::vector<uint8_t> instability_flags;

  size_t size() const { return times.size(); }
};

/// Outward normals of the peg side faces at the handle points.
std::pair<Vec2, Vec2> handle_normals(const Pose2& z);

/// Spring potential plus the frictionless quadratic contact penalty.
double potential(const WorldConfig& world, const Pose2& z, const ControlPair& u);

/// Contact penalty energy only (full boundary scan).
double penalty_energy(const WorldConfig& world, const Pose2& z);

/// Gradient of the potential in z. The spring part is analytic; the penalty
/// part uses central finite differences with step 1e-7.
Vec3 grad_z(const WorldConfig& world, const Pose2& z, const ControlPair& u);

/// Hessian of the potential in z, symmetrized. Spring part analytic, penalty
/// part by finite differences of the gradient.
Mat3 hessian_zz(const WorldConfig& world, const Pose2& z, const ControlPair& u);

/// Damped-Newton local minimization of the potential from z_init.
EquilibriumResult solve_equilibrium(const WorldConfig& world, const Pose2& z_init,
                                    const ControlPair& u);

struct RolloutOptions {
  double duration{5.0};
  bool strict_slip{false};  // terminate the rollout on a handle slip event
};

/// Quasi-static continuation over the control sequence; per-step cost samples
/// use the supplied weights' scales.
Trajectory rollout(const WorldConfig& world, const std::vector<ControlPair>& controls,
                   const Pose2& z0, const CostWeights& weights,
                   const RolloutOptions& opts = {});

}  // namespace mcplan
