#include "mcplan/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace mcplan {

void DmpParams::validate() const {
  if (basis_count < 2) throw std::invalid_argument("dmp: basis_count must be >= 2");
  if (!(duration > 0.0)) throw std::invalid_argument("dmp: duration must be positive");
  if (!(alpha_u > 0.0) || !(alpha_x > 0.0))
    throw std::invalid_argument("dmp: gains must be positive");
  if (theta.rows() != kControlDof || theta.cols() != basis_count)
    throw std::invalid_argument("dmp: theta must be 4 x basis_count");
}

Eigen::VectorXd basis_centers(const DmpParams& params) {
  const int p = params.basis_count;
  Eigen::VectorXd c(p);
  for (int i = 0; i < p; ++i) {
    // centers at the phase values reached at equally spaced times
    c(i) = std::exp(-params.alpha_x * static_cast<double>(i) / (p - 1));
  }
  return c;
}

namespace {

Eigen::VectorXd basis_widths(const Eigen::VectorXd& centers) {
  const int p = static_cast<int>(centers.size());
  Eigen::VectorXd h(p);
  for (int i = 0; i + 1 < p; ++i) {
    const double gap = centers(i) - centers(i + 1);
    // adjacent Gaussians intersect at activation 0.5 halfway between centers
    h(i) = 4.0 * std::log(2.0) / (gap * gap);
  }
  h(p - 1) = h(p - 2);
  return h;
}

}  // namespace

Eigen::VectorXd basis_activations(double x, const DmpParams& params) {
  const Eigen::VectorXd c = basis_centers(params);
  const Eigen::VectorXd h = basis_widths(c);
  Eigen::VectorXd psi(params.basis_count);
  for (int i = 0; i < params.basis_count; ++i) {
    const double d = x - c(i);
    psi(i) = std::exp(-h(i) * d * d);
  }
  const double total = psi.sum();
  if (total > 0.0) psi /= total;
  return psi;
}

double forcing(const DmpParams& params, int dof, double x) {
  const Eigen::VectorXd act = basis_activations(x, params);
  return params.theta.row(dof).dot(act) * x;
}

std::vector<ControlPair> generate(const DmpParams& params, int steps) {
  params.validate();
  if (steps < 1) throw std::invalid_argument("dmp: steps must be >= 1");

  const double tau = params.duration;
  const double dt = tau / steps;
  Eigen::Vector4d y = params.u0;
  Eigen::Vector4d v = Eigen::Vector4d::Zero();

  std::vector<ControlPair> out;
  out.reserve(steps + 1);
  auto pack = [](const Eigen::Vector4d& q) {
    return ControlPair{Vec2(q(0), q(1)), Vec2(q(2), q(3))};
  };
  out.push_back(pack(y));

  const Eigen::VectorXd centers = basis_centers(params);
  const Eigen::VectorXd widths = basis_widths(centers);
  for (int k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double x = std::exp(-params.alpha_x * t / tau);
    Eigen::VectorXd act(params.basis_count);
    for (int i = 0; i < params.basis_count; ++i) {
      const double d = x - centers(i);
      act(i) = std::exp(-widths(i) * d * d);
    }
    const double total = act.sum();
    if (total > 0.0) act /= total;
    for (int dof = 0; dof < kControlDof; ++dof) {
      const double f = params.theta.row(dof).dot(act) * x;
      const double dv =
          params.alpha_u * (params.beta_u * (params.uT(dof) - y(dof)) - v(dof)) + f;
      v(dof) += (dt / tau) * dv;
    }
    y += (dt / tau) * v;
    out.push_back(pack(y));
  }
  return out;
}

}  // namespace mcplan
