#include "mcplan/costs.hpp"

#include <cmath>

#include "mcplan/mechanics.hpp"

namespace mcplan {

double friction_cone(double mu, const Vec2& n, const Vec2& f) {
  const double fn = n.dot(f);
  const double tangential2 = std::max(f.squaredNorm() - fn * fn, 0.0);
  return -mu * fn - std::sqrt(tangential2);
}

double psi(double x) { return 0.5 * (1.0 + std::tanh(x)); }

double cost_friction_point(double mu, const Vec2& n, const Vec2& u_i, const Vec2& c_i,
                           double d0) {
  const Vec2 f = (u_i - c_i) / d0;
  const double p = std::max(psi(friction_cone(mu, n, f)), 1e-300);
  return -std::log(p);
}

double cost_energy_point(const Vec2& u_i, const Vec2& c_i, double l0, double d0) {
  const double stretch = (u_i - c_i).norm();
  const double dev = stretch - l0;
  return dev * dev / (2.0 * d0 * d0);
}

double cost_stability(const Mat3& hessian, const Vec3& k0_diag) {
  const double det_scaled = hessian.determinant() /
                            (k0_diag.x() * k0_diag.y() * k0_diag.z());
  if (!(det_scaled > kDetEpsilon)) return kStabilityCap;
  return -std::log(det_scaled);
}

double cost_kinematic(const Pose2& z_terminal, const Pose2& z_target, const Mat3& sigma,
                      double d0) {
  Vec3 r(z_terminal.x - z_target.x, z_terminal.y - z_target.y,
         Pose2::wrap_angle(z_terminal.theta - z_target.theta));
  return r.dot(sigma * r) / (d0 * d0);
}

CostBreakdown total_cost(const Trajectory& traj, const CostWeights& weights,
                         const Eigen::MatrixXd& theta, const Pose2& z_target) {
  CostBreakdown b;
  const size_t steps = traj.times.size();
  if (steps == 0) return b;
  const double dt = steps > 1 ? traj.times[1] - traj.times[0] : 0.0;
  // rectangle rule over the N intervals, sampling at the left endpoint
  for (size_t k = 0; k + 1 < steps; ++k) {
    b.friction += traj.cost_samples[k].friction * dt;
    b.energy += traj.cost_samples[k].energy * dt;
    b.stability += traj.cost_samples[k].stability * dt;
  }
  b.kinematic = cost_kinematic(traj.states.back(), z_target, weights.kinematic_weight(),
                               weights.d0);
  b.regularization = theta.squaredNorm();
  b.total = weights.alpha1 * b.kinematic + weights.alpha2 * b.friction +
            weights.alpha3 * b.energy + weights.alpha4 * b.stability +
            weights.alpha5 * b.regularization;
  return b;
}

double scenario_cost(const std::vector<std::pair<double, double>>& weighted_costs) {
  double total = 0.0;
  for (const auto& [p, j] : weighted_costs) total += p * j;
  return total;
}

}  // namespace mcplan
