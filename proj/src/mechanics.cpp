#include "mcplan/mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcplan {

namespace {

constexpr double kGradStep = 1e-7;     // central-difference step for the penalty gradient
constexpr double kHessStep = 1e-4;     // step for differencing the penalty gradient
constexpr double kNearMargin = 1e-3;   // active-set margin around the material [m]

Vec2 perp_cw(const Vec2& v) { return Vec2(v.y(), -v.x()); }

Pose2 shifted(const Pose2& z, int axis, double h) {
  Pose2 out = z;
  if (axis == 0) out.x += h;
  if (axis == 1) out.y += h;
  if (axis == 2) out.theta += h;
  return out;
}

double penalty_over(const WorldConfig& world, const Pose2& z, const std::vector<Vec2>& pts) {
  double e = 0.0;
  SurfaceHit hit;
  for (const Vec2& bp : pts) {
    if (probe_environment(world.hole, z.apply(bp), &hit)) {
      e += 0.5 * world.stiffness.k_pen * hit.penetration * hit.penetration;
    }
  }
  return e;
}

/// Body points that could touch the material within `margin` of pose z.
std::vector<Vec2> near_points(const WorldConfig& world, const Pose2& z, double margin) {
  std::vector<Vec2> out;
  for (const Vec2& bp : world.boundary()) {
    if (near_material(world.hole, z.apply(bp), margin)) out.push_back(bp);
  }
  return out;
}

Vec3 penalty_grad_over(const WorldConfig& world, const Pose2& z, const std::vector<Vec2>& pts) {
  Vec3 g = Vec3::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    const double ep = penalty_over(world, shifted(z, axis, kGradStep), pts);
    const double em = penalty_over(world, shifted(z, axis, -kGradStep), pts);
    g(axis) = (ep - em) / (2.0 * kGradStep);
  }
  return g;
}

Vec3 spring_grad(const WorldConfig& world, const Pose2& z, const ControlPair& u) {
  const double k_c = world.stiffness.k_c;
  const auto [c1, c2] = handle_contact_points(world.peg, z);
  Vec3 g;
  g(0) = k_c * (2.0 * z.x - u.u1.x() - u.u2.x());
  g(1) = k_c * (2.0 * z.y - u.u1.y() - u.u2.y());
  g(2) = 0.5 * k_c * (u.u1 - u.u2).dot(perp_cw(c1 - c2));
  return g;
}

Mat3 spring_hessian(const WorldConfig& world, const Pose2& z, const ControlPair& u) {
  const double k_c = world.stiffness.k_c;
  const auto [c1, c2] = handle_contact_points(world.peg, z);
  Mat3 h = Mat3::Zero();
  h(0, 0) = 2.0 * k_c;
  h(1, 1) = 2.0 * k_c;
  h(2, 2) = 0.5 * k_c * (u.u1 - u.u2).dot(c1 - c2);
  return h;
}

double weighted_norm(const Vec3& g, double rot_scale) {
  const double gt = g(2) / rot_scale;
  return std::sqrt(g(0) * g(0) + g(1) * g(1) + gt * gt);
}

/// Exact gradient of the contact penalty at pose z (used only to build the
/// solver's Newton model; the public grad_z stays the finite-difference form).
Vec3 penalty_grad_analytic(const WorldConfig& world, const Pose2& z,
                           const std::vector<Vec2>& pts) {
  const double k = world.stiffness.k_pen;
  Vec3 g = Vec3::Zero();
  SurfaceHit hit;
  for (const Vec2& bp : pts) {
    const Vec2 rbp = z.rotate(bp);
    if (!probe_environment(world.hole, rbp + z.translation(), &hit)) continue;
    const Vec2 p_theta(-rbp.y(), rbp.x());  // d(world point)/d(theta)
    const double s = -k * hit.penetration;  // dPhi/d(point) = -k delta n
    g(0) += s * hit.normal_world.x();
    g(1) += s * hit.normal_world.y();
    g(2) += s * p_theta.dot(hit.normal_world);
  }
  return g;
}

/// Newton model for the solver: the Jacobian of the finite-difference
/// penalty gradient field the convergence test measures. Each component of
/// that field averages the true contact force over its +-kGradStep stencil,
/// so the matching Jacobian is the difference of exact gradients at the
/// stencil states — this stays well-conditioned across the contact kink,
/// where the instantaneous Hessian switches between 0 and k_pen.
Mat3 penalty_model_hessian(const WorldConfig& world, const Pose2& z,
                           const std::vector<Vec2>& pts) {
  Mat3 j = Mat3::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    const Vec3 gp = penalty_grad_analytic(world, shifted(z, axis, kGradStep), pts);
    const Vec3 gm = penalty_grad_analytic(world, shifted(z, axis, -kGradStep), pts);
    j.row(axis) = ((gp - gm) / (2.0 * kGradStep)).transpose();
  }
  return 0.5 * (j + j.transpose());
}

}  // namespace

void WorldConfig::finalize() {
  peg.validate();
  hole.validate();
  boundary_pts = boundary_samples(peg, contact_spacing);
}

const std::vector<Vec2>& WorldConfig::boundary() const {
  if (boundary_pts.empty()) {
    throw std::logic_error("WorldConfig::finalize() must be called before simulation");
  }
  return boundary_pts;
}

std::pair<Vec2, Vec2> handle_normals(const Pose2& z) {
  return {z.rotate(Vec2(-1.0, 0.0)), z.rotate(Vec2(1.0, 0.0))};
}

double potential(const WorldConfig& world, const Pose2& z, const ControlPair& u) {
  const double k_c = world.stiffness.k_c;
  const auto [c1, c2] = handle_contact_points(world.peg, z);
  const double springs =
      0.5 * k_c * ((u.u1 - c1).squaredNorm() + (u.u2 - c2).squaredNorm());
  return springs + penalty_energy(world, z);
}

double penalty_energy(const WorldConfig& world, const Pose2& z) {
  return penalty_over(world, z, world.boundary());
}

Vec3 grad_z(const WorldConfig& world, const Pose2& z, const ControlPair& u) {
  Vec3 g = spring_grad(world, z, u);
  const std::vector<Vec2> active = near_points(world, z, kNearMargin);
  if (!active.empty()) g += penalty_grad_over(world, z, active);
  return g;
}

Mat3 hessian_zz(const WorldConfig& world, const Pose2& z, const ControlPair& u) {
  Mat3 h = spring_hessian(world, z, u);
  const std::vector<Vec2> active = near_points(world, z, kNearMargin);
  if (!active.empty()) {
    Mat3 hp;
    for (int axis = 0; axis < 3; ++axis) {
      const Vec3 gp = penalty_grad_over(world, shifted(z, axis, kHessStep), active);
      const Vec3 gm = penalty_grad_over(world, shifted(z, axis, -kHessStep), active);
      hp.col(axis) = (gp - gm) / (2.0 * kHessStep);
    }
    h += hp;
  }
  return 0.5 * (h + h.transpose());
}

EquilibriumResult solve_equilibrium(const WorldConfig& world, const Pose2& z_init,
                                    const ControlPair& u) {
  if (!std::isfinite(z_init.x) || !std::isfinite(z_init.y) || !std::isfinite(z_init.theta)) {
    throw std::invalid_argument("solve_equilibrium: non-finite initial state");
  }
  const SolverOptions& opt = world.solver;
  const double lsc = opt.rot_norm_scale;
  const Mat3 damping_dir = Vec3(1.0, 1.0, lsc * lsc).asDiagonal();

  Pose2 z = z_init;
  double w_curr = potential(world, z, u);
  double lambda = 1e-6;
  bool converged = false;

  // grad_z recomputed inline so the active set is shared with the model Hessian
  std::vector<Vec2> active = near_points(world, z, kNearMargin);
  auto gradient_at = [&](const Pose2& zz) {
    Vec3 gg = spring_grad(world, zz, u);
    if (!active.empty()) gg += penalty_grad_over(world, zz, active);
    return gg;
  };
  Vec3 g = gradient_at(z);
  double gn = weighted_norm(g, lsc);
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    if (gn <= opt.tolerance) {
      converged = true;
      break;
    }
    Mat3 h = spring_hessian(world, z, u);
    if (!active.empty()) h += penalty_model_hessian(world, z, active);
    bool stepped = false;
    while (lambda <= 1e10) {
      const Mat3 hd = h + (lambda * world.stiffness.k_c) * damping_dir;
      Eigen::LLT<Mat3> llt(hd);
      if (llt.info() != Eigen::Success) {
        lambda *= 2.0;
        continue;
      }
      const Vec3 step = llt.solve(-g);
      const Pose2 z_try{z.x + step(0), z.y + step(1), z.theta + step(2)};
      const double w_try = potential(world, z_try, u);
      bool accept = w_try < w_curr;
      if (!accept && lambda >= 1e2) {
        // The finite-difference gradient is smeared over its stencil, so its
        // zero can sit where the exact potential still has a downhill
        // direction (within a stencil width of a contact kink). Fall back to
        // accepting steps that shrink the gradient norm the convergence test
        // uses.
        const Vec3 g_try = grad_z(world, z_try, u);
        accept = weighted_norm(g_try, lsc) < 0.9 * gn;
      }
      if (accept) {
        z = z_try;
        w_curr = w_try;
        lambda = std::max(lambda * 0.5, 1e-10);
        stepped = true;
        break;
      }
      lambda *= 2.0;
    }
    if (!stepped) break;  // no descent direction left: return best iterate
    lambda = std::min(lambda, 1e10);
    active = near_points(world, z, kNearMargin);
    g = gradient_at(z);
    gn = weighted_norm(g, lsc);
  }
  // Root polish on the gradient field itself. The line search on W cannot
  // finish the job: near machine precision W differences vanish, and near a
  // contact kink the minimizer of W sits a finite-difference stencil away
  // from the zero of the finite-difference gradient the convergence test
  // measures. Levenberg-Marquardt on the scaled field is monotone in the
  // tested norm and quadratic once the Jacobian model is accurate.
  {
    const Mat3 row_scale = Vec3(1.0, 1.0, 1.0 / lsc).asDiagonal();
    double lm = 1e-3;
    for (int it2 = 0; it2 < 250 && gn > opt.tolerance && lm <= 1e12; ++it2) {
      Mat3 jac = spring_hessian(world, z, u);
      if (!active.empty()) jac += penalty_model_hessian(world, z, active);
      const Mat3 js = row_scale * jac;
      const Vec3 fs = row_scale * g;
      Mat3 a = js.transpose() * js;
      // Marquardt scaling keeps the damping meaningful across the very
      // different stiffness scales of the translational and angular axes.
      for (int d = 0; d < 3; ++d) a(d, d) += lm * std::max(a(d, d), 1e-30);
      const Vec3 step = a.ldlt().solve(-js.transpose() * fs);
      const Pose2 z_p{z.x + step(0), z.y + step(1), z.theta + step(2)};
      const Vec3 g_p = grad_z(world, z_p, u);
      const double gn_p = weighted_norm(g_p, lsc);
      if (gn_p < gn) {
        z = z_p;
        g = g_p;
        gn = gn_p;
        active = near_points(world, z, kNearMargin);
        lm = std::max(lm / 3.0, 1e-12);
      } else {
        lm *= 4.0;
      }
    }
  }
  if (gn <= opt.tolerance) converged = true;

  EquilibriumResult res;
  res.z_star = z;
  res.converged = converged;
  res.grad_norm = gn;
  res.hessian = hessian_zz(world, z, u);
  const Vec3 k0 = world.stiffness.reference_diag();
  res.det_scaled = res.hessian.determinant() / (k0.x() * k0.y() * k0.z());
  res.contacts = environment_contacts(world.boundary(), world.hole, z, world.mu_env);
  const Vec2 du = u.u2 - u.u1;
  if (du.norm() > 1e-12) {
    const double axis_angle = std::atan2(du.y(), du.x());
    res.multiplicity_branch =
        static_cast<int>(std::lround((z.theta - axis_angle) / M_PI));
  }
  return res;
}

Trajectory rollout(const WorldConfig& world, const std::vector<ControlPair>& controls,
                   const Pose2& z0, const CostWeights& weights, const RolloutOptions& opts) {
  if (controls.empty()) throw std::invalid_argument("rollout: empty control sequence");
  const size_t n = controls.size();
  const double dt = n > 1 ? opts.duration / static_cast<double>(n - 1) : 0.0;
  const Vec3 k0 = world.stiffness.reference_diag();

  Trajectory traj;
  traj.times.reserve(n);
  traj.controls.reserve(n);
  traj.states.reserve(n);
  traj.equilibria.reserve(n);
  traj.cost_samples.reserve(n);
  traj.slip_flags.reserve(n);
  traj.instability_flags.reserve(n);

  Pose2 z_prev = z0;
  for (size_t k = 0; k < n; ++k) {
    const ControlPair& u = controls[k];
    EquilibriumResult eq = solve_equilibrium(world, z_prev, u);
    z_prev = eq.z_star;

    const auto [c1, c2] = handle_contact_points(world.peg, eq.z_star);
    const auto [n1, n2] = handle_normals(eq.z_star);
    const Vec2 f1 = world.stiffness.k_c * (u.u1 - c1);
    const Vec2 f2 = world.stiffness.k_c * (u.u2 - c2);
    const bool slip = friction_cone(world.mu_handle, n1, f1) < 0.0 ||
                      friction_cone(world.mu_handle, n2, f2) < 0.0;
    const bool unstable = eq.det_scaled <= 0.0;

    CostSample sample;
    sample.friction = cost_friction_point(world.mu_handle, n1, u.u1, c1, weights.d0) +
                      cost_friction_point(world.mu_handle, n2, u.u2, c2, weights.d0);
    sample.energy = cost_energy_point(u.u1, c1, weights.l0, weights.d0) +
                    cost_energy_point(u.u2, c2, weights.l0, weights.d0);
    sample.stability = cost_stability(eq.hessian, k0);

    traj.times.push_back(static_cast<double>(k) * dt);
    traj.controls.push_back(u);
    traj.states.push_back(eq.z_star);
    traj.cost_samples.push_back(sample);
    traj.slip_flags.push_back(slip ? 1 : 0);
    traj.instability_flags.push_back(unstable ? 1 : 0);
    traj.equilibria.push_back(std::move(eq));

    if (opts.strict_slip && slip) break;
  }
  return traj;
}

}  // namespace mcplan
