#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "mcplan/geometry.hpp"

namespace mcplan {

struct Trajectory;  // mechanics.hpp

/// Weights and scales of the trajectory cost. d0 is the length scale of the
/// contact task, l0 the preferred squeeze depth of the impedance springs.
struct CostWeights {
  double alpha1{10.0};
  double alpha2{1e-2};
  double alpha3{1e-3};
  double alpha4{1e-3};
  double alpha5{1e-4};
  double d0{1e-3};
  double l0{0.025};
  /// rho in Sigma = diag(1, 1, rho^2): converts the angular terminal residual
  /// to an equivalent length so the kinematic cost stays unitless.
  double sigma_rot_scale{0.01};

  Mat3 kinematic_weight() const {
    Mat3 s = Mat3::Zero();
    s(0, 0) = 1.0;
    s(1, 1) = 1.0;
    s(2, 2) = sigma_rot_scale * sigma_rot_scale;
    return s;
  }
};

struct CostBreakdown {
  double kinematic{0.0};
  double friction{0.0};
  double energy{0.0};
  double stability{0.0};
  double regularization{0.0};
  double total{0.0};
};

/// Per-step integrand samples recorded during a rollout.
struct CostSample {
  double friction{0.0};
  double energy{0.0};
  double stability{0.0};
};

/// Barrier cap returned by the stability cost on a non-positive determinant.
inline constexpr double kStabilityCap = 1e3;
inline constexpr double kDetEpsilon = 1e-12;

/// Positive inside the friction cone (compression with small tangential),
/// negative outside. Positively homogeneous of degree 1 in f.
double friction_cone(double mu, const Vec2& n, const Vec2& f);

/// (1 + tanh x) / 2.
double psi(double x);

/// -log(psi(F_cone(mu, n, (u - c)/d0))); the force proxy is the unitless
/// spring stretch, so the controller stiffness cancels out of the direction.
double cost_friction_point(double mu, const Vec2& n, const Vec2& u_i, const Vec2& c_i, double d0);

/// (|u - c| - l0)^2 / (2 d0^2).
double cost_energy_point(const Vec2& u_i, const Vec2& c_i, double l0, double d0);

/// -log(det(H K0^-1)) when the determinant is positive, kStabilityCap otherwise.
double cost_stability(const Mat3& hessian, const Vec3& k0_diag);

/// Weighted terminal pose error; the angular residual is wrapped first.
double cost_kinematic(const Pose2& z_terminal, const Pose2& z_target, const Mat3& sigma,
                      double d0);

/// Rectangle-rule aggregation of the per-step samples plus terminal and
/// regularization terms.
CostBreakdown total_cost(const Trajectory& traj, const CostWeights& weights,
                         const Eigen::MatrixXd& theta, const Pose2& z_target);

/// Sum of p_s * J_s in the given (fixed) scenario order.
double scenario_cost(const std::vector<std::pair<double, double>>& weighted_costs);

}  // namespace mcplan
