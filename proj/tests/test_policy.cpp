#include <doctest.h>

#include <cmath>

#include "mcplan/policy.hpp"
#include "mcplan/rng.hpp"

using namespace mcplan;

namespace {

DmpParams base_params() {
  DmpParams p;
  p.theta = Eigen::MatrixXd::Zero(kControlDof, p.basis_count);
  p.u0 << -0.04, 0.06, 0.04, 0.06;
  p.uT << -0.03, 0.01, 0.03, 0.01;
  return p;
}

}  // namespace

TEST_CASE("basis centers and activations") {
  const DmpParams p = base_params();
  const Eigen::VectorXd c = basis_centers(p);
  REQUIRE(c.size() == p.basis_count);
  CHECK(c(0) == doctest::Approx(1.0));
  CHECK(c(p.basis_count - 1) == doctest::Approx(std::exp(-p.alpha_x)));
  for (int i = 1; i < p.basis_count; ++i) CHECK(c(i) < c(i - 1));

  for (double x : {1.0, 0.6, 0.2, 0.05}) {
    const Eigen::VectorXd act = basis_activations(x, p);
    CHECK(act.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(act.minCoeff() >= 0.0);
  }
  // each basis dominates at its own center: its unnormalized value is 1
  // there while every other Gaussian is below 1
  for (int i = 0; i < p.basis_count; ++i) {
    const Eigen::VectorXd at_center = basis_activations(c(i), p);
    int argmax = 0;
    at_center.maxCoeff(&argmax);
    CHECK(argmax == i);
  }
}

TEST_CASE("forcing is linear in theta and gated by phase") {
  DmpParams p = base_params();
  Rng rng(5);
  for (int i = 0; i < p.basis_count; ++i) p.theta(2, i) = rng.normal();
  const double f1 = forcing(p, 2, 0.7);
  DmpParams p2 = p;
  p2.theta *= 3.0;
  CHECK(forcing(p2, 2, 0.7) == doctest::Approx(3.0 * f1).epsilon(1e-12));
  CHECK(forcing(p, 0, 0.7) == 0.0);  // untouched row stays zero
  // gate: forcing scales with x, so it vanishes as the phase decays
  CHECK(std::abs(forcing(p, 2, 1e-9)) < 1e-6);
}

TEST_CASE("generate meets the boundary conditions") {
  const DmpParams p = base_params();
  const auto traj = generate(p, 400);
  REQUIRE(traj.size() == 401);
  // u(0) == u0 exactly
  CHECK(traj[0].u1.x() == p.u0(0));
  CHECK(traj[0].u1.y() == p.u0(1));
  CHECK(traj[0].u2.x() == p.u0(2));
  CHECK(traj[0].u2.y() == p.u0(3));
  // endpoint converges to uT (critically damped, T = 5 s, alpha_u = 25)
  CHECK(traj.back().u1.x() == doctest::Approx(p.uT(0)).epsilon(1e-4));
  CHECK(traj.back().u1.y() == doctest::Approx(p.uT(1)).epsilon(1e-4));
  CHECK(traj.back().u2.x() == doctest::Approx(p.uT(2)).epsilon(1e-4));
  CHECK(traj.back().u2.y() == doctest::Approx(p.uT(3)).epsilon(1e-4));
}

TEST_CASE("integration agrees with a fine-step reference") {
  DmpParams p = base_params();
  Rng rng(6);
  for (int d = 0; d < kControlDof; ++d) {
    for (int i = 0; i < p.basis_count; ++i) p.theta(d, i) = 5.0 * rng.normal();
  }
  const auto coarse = generate(p, 200);
  const auto fine = generate(p, 1600);
  // first-order Euler: eight-fold refinement changes the endpoint by O(dt)
  for (int d = 0; d < 2; ++d) {
    CHECK(coarse.back().u1(d) == doctest::Approx(fine.back().u1(d)).epsilon(5e-3));
    CHECK(coarse.back().u2(d) == doctest::Approx(fine.back().u2(d)).epsilon(5e-3));
  }
  // intermediate samples line up at shared times (every 8th fine sample)
  const ControlPair& c_mid = coarse[100];
  const ControlPair& f_mid = fine[800];
  CHECK((c_mid.u1 - f_mid.u1).norm() < 2e-3);
  CHECK((c_mid.u2 - f_mid.u2).norm() < 2e-3);
}

TEST_CASE("nonzero forcing bends the path but not the endpoint") {
  DmpParams p = base_params();
  p.theta(0, 3) = 400.0;
  const auto forced = generate(p, 800);
  DmpParams p0 = base_params();
  const auto unforced = generate(p0, 800);
  double max_dev = 0.0;
  for (size_t k = 0; k < forced.size(); ++k) {
    max_dev = std::max(max_dev, std::abs(forced[k].u1.x() - unforced[k].u1.x()));
  }
  CHECK(max_dev > 1e-3);  // the forcing visibly deforms the trajectory
  // phase gating: the endpoint still lands near uT (the phase has decayed to
  // exp(-alpha_x) ~ 0.018, so a small forced residual remains)
  CHECK(std::abs(forced.back().u1.x() - p.uT(0)) < 5e-3);
}

TEST_CASE("validate rejects malformed parameters") {
  DmpParams p = base_params();
  p.basis_count = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = base_params();
  p.duration = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = base_params();
  p.theta = Eigen::MatrixXd::Zero(3, p.basis_count);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(generate(base_params(), 0), std::invalid_argument);
}
