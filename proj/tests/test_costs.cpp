#include <doctest.h>

#include <cmath>

#include "mcplan/costs.hpp"
#include "mcplan/mechanics.hpp"
#include "mcplan/rng.hpp"

using namespace mcplan;

TEST_CASE("friction cone boundary and sign") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double a = 0.1 + 10.0 * rng.uniform();
    const double mu = 0.05 + rng.uniform();
    const double ang = 2.0 * M_PI * rng.uniform();
    const Vec2 n(std::cos(ang), std::sin(ang));
    const Vec2 t(-n.y(), n.x());
    // exactly on the cone boundary
    const Vec2 f_edge = a * (-n) + mu * a * t;
    CHECK(std::abs(friction_cone(mu, n, f_edge)) <= 1e-9);
    CHECK(friction_cone(mu, n, a * (-n) + 0.99 * mu * a * t) > 0.0);
    CHECK(friction_cone(mu, n, a * (-n) + 1.01 * mu * a * t) < 0.0);
  }
}

TEST_CASE("friction cone homogeneity and tension") {
  Rng rng(12);
  const Vec2 n(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec2 f(rng.normal(), rng.normal());
    const double s = 0.1 + 5.0 * rng.uniform();
    CHECK(friction_cone(0.4, n, s * f) ==
          doctest::Approx(s * friction_cone(0.4, n, f)).epsilon(1e-12));
  }
  // pure tension is always outside the cone
  CHECK(friction_cone(0.6, n, Vec2(0.0, 1.0)) < 0.0);
  // pure compression is strictly inside
  CHECK(friction_cone(0.6, n, Vec2(0.0, -1.0)) > 0.0);
}

TEST_CASE("psi and friction cost spot values") {
  CHECK(psi(0.0) == doctest::Approx(0.5));
  CHECK(psi(100.0) == doctest::Approx(1.0));
  CHECK(psi(-3.0) + psi(3.0) == doctest::Approx(1.0).epsilon(1e-12));
  // -log(psi(6)) with tanh(6) = 0.999987711650796...
  CHECK(-std::log(psi(6.0)) == doctest::Approx(6.1442e-6).epsilon(1e-3));

  // spring pulls straight into the surface: deep inside the cone, tiny cost
  const Vec2 n(0.0, 1.0);
  const Vec2 c(0.0, 0.0);
  const Vec2 u(0.0, -0.006);
  CHECK(cost_friction_point(0.6, n, u, c, 1e-3) == doctest::Approx(-std::log(psi(0.6 * 6.0))));
  // tangential pull outside the cone: large positive cost
  CHECK(cost_friction_point(0.05, n, Vec2(0.01, 0.0), c, 1e-3) > 5.0);
}

TEST_CASE("energy cost") {
  const Vec2 c(0.1, 0.2);
  CHECK(cost_energy_point(c + Vec2(0.025, 0.0), c, 0.025, 1e-3) == doctest::Approx(0.0));
  CHECK(cost_energy_point(c + Vec2(0.026, 0.0), c, 0.025, 1e-3) == doctest::Approx(0.5));
  CHECK(cost_energy_point(c, c, 0.025, 1e-3) == doctest::Approx(312.5));
}

TEST_CASE("stability cost closed form and cap") {
  const double k_c = 100.0, k_t = 1e4, k_r = 10.0;
  const Vec3 k0(k_t, k_t, k_r);
  const double dot = 7.5e-3;
  Mat3 h = Mat3::Zero();
  h(0, 0) = 2.0 * k_c;
  h(1, 1) = 2.0 * k_c;
  h(2, 2) = 0.5 * k_c * dot;

  const double generic = cost_stability(h, k0);
  // closed form: -log(2 k_c^3 dot / (k_t^2 k_r))
  const double closed = -std::log(2.0 * k_c * k_c * k_c * dot / (k_t * k_t * k_r));
  CHECK(generic == doctest::Approx(closed).epsilon(1e-12));
  CHECK(generic == doctest::Approx(11.1070).epsilon(1e-4));

  h(2, 2) = -0.5 * k_c * dot;  // crossed controls: unstable branch
  CHECK(cost_stability(h, k0) == kStabilityCap);
  h(2, 2) = 0.0;
  CHECK(cost_stability(h, k0) == kStabilityCap);
}

TEST_CASE("kinematic cost wraps the angular residual") {
  CostWeights w;
  const Mat3 sigma = w.kinematic_weight();
  const Pose2 tgt{0.0, 0.0, 0.0};
  CHECK(cost_kinematic(Pose2{0.0, 0.0, 2.0 * M_PI}, tgt, sigma, w.d0) ==
        doctest::Approx(0.0).epsilon(1e-18));
  // 1 mm error in x is one unit of cost at d0 = 1 mm
  CHECK(cost_kinematic(Pose2{1e-3, 0.0, 0.0}, tgt, sigma, w.d0) == doctest::Approx(1.0));
  // rho = 0.01 m: 0.1 rad maps to 1 mm equivalent
  CHECK(cost_kinematic(Pose2{0.0, 0.0, 0.1}, tgt, sigma, w.d0) == doctest::Approx(1.0));
}

TEST_CASE("total cost equals an independent summation") {
  CostWeights w;
  Trajectory traj;
  const int n = 6;
  const double dt = 0.5;
  Rng rng(4);
  for (int k = 0; k < n; ++k) {
    traj.times.push_back(k * dt);
    traj.states.push_back(Pose2{0.001 * k, 0.002 * k, 0.01 * k});
    traj.controls.push_back({});
    traj.equilibria.push_back({});
    traj.cost_samples.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    traj.slip_flags.push_back(0);
    traj.instability_flags.push_back(0);
  }
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(4, 3);
  theta(1, 2) = 2.0;
  theta(3, 0) = -1.5;
  const Pose2 tgt{0.004, 0.012, 0.02};

  const CostBreakdown b = total_cost(traj, w, theta, tgt);

  double fr = 0.0, en = 0.0, st = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    fr += traj.cost_samples[k].friction * dt;
    en += traj.cost_samples[k].energy * dt;
    st += traj.cost_samples[k].stability * dt;
  }
  CHECK(b.friction == doctest::Approx(fr).epsilon(1e-14));
  CHECK(b.energy == doctest::Approx(en).epsilon(1e-14));
  CHECK(b.stability == doctest::Approx(st).epsilon(1e-14));
  CHECK(b.regularization == doctest::Approx(4.0 + 2.25).epsilon(1e-14));
  CHECK(b.kinematic ==
        doctest::Approx(cost_kinematic(traj.states.back(), tgt, w.kinematic_weight(), w.d0)));
  const double total = w.alpha1 * b.kinematic + w.alpha2 * b.friction + w.alpha3 * b.energy +
                       w.alpha4 * b.stability + w.alpha5 * b.regularization;
  CHECK(b.total == doctest::Approx(total).epsilon(1e-14));
}

TEST_CASE("scenario cost is a weighted fixed-order sum") {
  std::vector<std::pair<double, double>> wc = {{0.25, 4.0}, {0.25, 2.0}, {0.5, 10.0}};
  CHECK(scenario_cost(wc) == doctest::Approx(6.5).epsilon(1e-15));
  std::vector<std::pair<double, double>> permuted = {{0.5, 10.0}, {0.25, 4.0}, {0.25, 2.0}};
  CHECK(scenario_cost(permuted) == doctest::Approx(scenario_cost(wc)).epsilon(1e-15));
}
