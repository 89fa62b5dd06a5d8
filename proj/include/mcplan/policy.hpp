#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mcplan/mechanics.hpp"

namespace mcplan {

inline constexpr int kControlDof = 4;  // (u1x, u1y, u2x, u2y)

/// DMP parameterization of the 4-DOF control trajectory: a critically damped
/// transformation system per DOF driven by a phase-gated RBF forcing term.
struct DmpParams {
  Eigen::MatrixXd theta;  // kControlDof x basis_count forcing weights
  Eigen::Vector4d u0{Eigen::Vector4d::Zero()};
  Eigen::Vector4d uT{Eigen::Vector4d::Zero()};
  double duration{5.0};
  int basis_count{10};
  double alpha_u{25.0};
  double beta_u{6.25};  // alpha_u / 4: critical damping
  double alpha_x{4.0};

  void validate() const;  // throws std::invalid_argument
};

/// Log-spaced RBF centers in phase, strictly decreasing from 1.
Eigen::VectorXd basis_centers(const DmpParams& params);

/// Normalized Gaussian activations at phase x; sums to 1.
Eigen::VectorXd basis_activations(double x, const DmpParams& params);

/// Phase-gated forcing value for one DOF.
double forcing(const DmpParams& params, int dof, double x);

/// Euler-integrates the transformation system into N+1 control samples.
/// u(0) equals u0 exactly; the endpoint lands on uT up to integration error.
std::vector<ControlPair> generate(const DmpParams& params, int steps);

}  // namespace mcplan
