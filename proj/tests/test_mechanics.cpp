#include <doctest.h>

#include <cmath>

#include "mcplan/costs.hpp"
#include "mcplan/mechanics.hpp"
#include "mcplan/rng.hpp"

using namespace mcplan;

namespace {

WorldConfig small_world() {
  WorldConfig w;
  w.peg.half_width = 0.0045;
  w.peg.half_height = 0.006;
  HoleEntry h;
  h.width = 0.0095;
  h.depth = 0.008;
  h.chamfer_width = 0.0025;
  w.hole.holes = {h};
  w.contact_spacing = 2e-4;
  w.finalize();
  return w;
}

WorldConfig free_world() {
  // hole far away so random poses around the origin never touch material
  WorldConfig w;
  w.peg.half_width = 0.0375;
  w.peg.half_height = 0.0375;
  HoleEntry h;
  w.hole.holes = {h};
  w.hole.mouth_center = Pose2{0.0, -10.0, 0.0};
  w.finalize();
  return w;
}

Vec3 fd_grad(const WorldConfig& w, const Pose2& z, const ControlPair& u, double h) {
  Vec3 g;
  for (int axis = 0; axis < 3; ++axis) {
    Pose2 zp = z, zm = z;
    (axis == 0 ? zp.x : axis == 1 ? zp.y : zp.theta) += h;
    (axis == 0 ? zm.x : axis == 1 ? zm.y : zm.theta) -= h;
    g(axis) = (potential(w, zp, u) - potential(w, zm, u)) / (2.0 * h);
  }
  return g;
}

Mat3 fd_hessian(const WorldConfig& w, const Pose2& z, const ControlPair& u, double h) {
  Mat3 out;
  for (int axis = 0; axis < 3; ++axis) {
    Pose2 zp = z, zm = z;
    (axis == 0 ? zp.x : axis == 1 ? zp.y : zp.theta) += h;
    (axis == 0 ? zm.x : axis == 1 ? zm.y : zm.theta) -= h;
    out.col(axis) = (grad_z(w, zp, u) - grad_z(w, zm, u)) / (2.0 * h);
  }
  return 0.5 * (out + out.transpose());
}

}  // namespace

TEST_CASE("free-space gradient matches the closed form") {
  const WorldConfig w = free_world();
  Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    const Pose2 z{0.05 * rng.normal(), 0.05 * rng.normal(), rng.normal()};
    const ControlPair u{Vec2(0.1 * rng.normal(), 0.1 * rng.normal()),
                        Vec2(0.1 * rng.normal(), 0.1 * rng.normal())};
    const Vec3 g = grad_z(w, z, u);
    const auto [c1, c2] = handle_contact_points(w.peg, z);
    const double k_c = w.stiffness.k_c;
    CHECK(g(0) == doctest::Approx(k_c * (2.0 * z.x - u.u1.x() - u.u2.x())).epsilon(1e-12));
    CHECK(g(1) == doctest::Approx(k_c * (2.0 * z.y - u.u1.y() - u.u2.y())).epsilon(1e-12));
    const Vec2 d = c1 - c2;
    const Vec2 perp(d.y(), -d.x());
    CHECK(g(2) == doctest::Approx(0.5 * k_c * (u.u1 - u.u2).dot(perp)).epsilon(1e-12));
  }
}

TEST_CASE("gradient matches central differences of the potential") {
  Rng rng(22);
  const WorldConfig wf = free_world();
  for (int i = 0; i < 500; ++i) {
    const Pose2 z{0.05 * rng.normal(), 0.05 * rng.normal(), rng.normal()};
    const ControlPair u{Vec2(0.1 * rng.normal(), 0.1 * rng.normal()),
                        Vec2(0.1 * rng.normal(), 0.1 * rng.normal())};
    const Vec3 g = grad_z(wf, z, u);
    const Vec3 g_fd = fd_grad(wf, z, u, 1e-6);
    CHECK((g - g_fd).norm() <= 1e-5 * std::max(1.0, g_fd.norm()));
  }

  // contact configurations
  const WorldConfig wc = small_world();
  int contact_checks = 0;
  for (int i = 0; i < 500; ++i) {
    const Pose2 z{2e-3 * rng.normal(), 0.0055 + 2e-3 * rng.normal(), 0.1 * rng.normal()};
    if (penalty_energy(wc, z) <= 0.0) continue;
    const ControlPair u{Vec2(-0.02, 0.005), Vec2(0.02, 0.006)};
    const Vec3 g = grad_z(wc, z, u);
    const Vec3 g_fd = fd_grad(wc, z, u, 1e-7);
    CHECK((g - g_fd).norm() <= 1e-5 * std::max(1.0, g_fd.norm()));
    ++contact_checks;
  }
  CHECK(contact_checks > 100);
}

TEST_CASE("hessian matches central differences of the gradient") {
  Rng rng(23);
  const WorldConfig wf = free_world();
  for (int i = 0; i < 300; ++i) {
    const Pose2 z{0.05 * rng.normal(), 0.05 * rng.normal(), rng.normal()};
    const ControlPair u{Vec2(0.1 * rng.normal(), 0.1 * rng.normal()),
                        Vec2(0.1 * rng.normal(), 0.1 * rng.normal())};
    const Mat3 h = hessian_zz(wf, z, u);
    CHECK((h - h.transpose()).norm() == 0.0);  // symmetrized by construction
    const Mat3 h_fd = fd_hessian(wf, z, u, 5e-5);
    CHECK((h - h_fd).norm() <= 1e-4 * std::max(1.0, h_fd.norm()));
    // Eq. 21 diagonal
    const auto [c1, c2] = handle_contact_points(wf.peg, z);
    CHECK(h(0, 0) == doctest::Approx(2.0 * wf.stiffness.k_c));
    CHECK(h(1, 1) == doctest::Approx(2.0 * wf.stiffness.k_c));
    CHECK(h(2, 2) ==
          doctest::Approx(0.5 * wf.stiffness.k_c * (u.u1 - u.u2).dot(c1 - c2)).epsilon(1e-10));
  }
}

TEST_CASE("third hessian entry sign tracks control alignment") {
  const WorldConfig w = free_world();
  Rng rng(24);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 z{0.01 * rng.normal(), 0.01 * rng.normal(), rng.normal()};
    const ControlPair u{Vec2(0.1 * rng.normal(), 0.1 * rng.normal()),
                        Vec2(0.1 * rng.normal(), 0.1 * rng.normal())};
    const auto [c1, c2] = handle_contact_points(w.peg, z);
    const double align = (u.u1 - u.u2).dot(c1 - c2);
    const Mat3 h = hessian_zz(w, z, u);
    if (align > 1e-12) CHECK(h(2, 2) > 0.0);
    if (align < -1e-12) CHECK(h(2, 2) < 0.0);
  }
}

TEST_CASE("free-space equilibrium sits at the control midpoint") {
  const WorldConfig w = free_world();
  Rng rng(25);
  for (int i = 0; i < 200; ++i) {
    const Vec2 mid(0.05 * rng.normal(), 0.05 * rng.normal());
    const double ang = 2.0 * M_PI * rng.uniform();
    const double sep = 0.05 + 0.1 * rng.uniform();
    const Vec2 axis(std::cos(ang), std::sin(ang));
    const ControlPair u{mid - 0.5 * sep * axis, mid + 0.5 * sep * axis};
    // start near the aligned branch
    const Pose2 z0{mid.x() + 1e-3, mid.y() - 1e-3, ang + 0.2};
    const EquilibriumResult eq = solve_equilibrium(w, z0, u);
    REQUIRE(eq.converged);
    CHECK(std::abs(eq.z_star.x - mid.x()) < 1e-9);
    CHECK(std::abs(eq.z_star.y - mid.y()) < 1e-9);
    // (u1 - u2) parallel to (c1 - c2)
    const auto [c1, c2] = handle_contact_points(w.peg, eq.z_star);
    const Vec2 a = (u.u1 - u.u2).normalized();
    const Vec2 b = (c1 - c2).normalized();
    CHECK(std::abs(a.x() * b.y() - a.y() * b.x()) < 1e-8);
    CHECK(eq.det_scaled > 0.0);
    CHECK(eq.multiplicity_branch % 2 == 0);  // aligned branch: even multiple of pi
  }
}

TEST_CASE("anti-aligned branch is detected as unstable") {
  const WorldConfig w = free_world();
  // controls crossed relative to the handles: u1 on the right, u2 on the left
  const ControlPair u{Vec2(0.05, 0.0), Vec2(-0.05, 0.0)};
  const Pose2 z0{0.0, 0.0, 0.0};  // saddle of the rotational potential
  const EquilibriumResult eq = solve_equilibrium(w, z0, u);
  CHECK(eq.det_scaled < 0.0);
  CHECK(std::abs(eq.multiplicity_branch) % 2 == 1);
}

TEST_CASE("contact equilibrium is a local minimum of the potential") {
  const WorldConfig w = small_world();
  // press the peg down onto the plate next to the hole mouth
  const Pose2 z0{0.0065, 0.0062, 0.0};
  const ControlPair u{Vec2(0.0065 - 0.0065, 0.004), Vec2(0.0065 + 0.0065, 0.004)};
  const EquilibriumResult eq = solve_equilibrium(w, z0, u);
  REQUIRE(eq.converged);
  CHECK(penalty_energy(w, eq.z_star) > 0.0);  // actually in contact

  const double w_star = potential(w, eq.z_star, u);
  for (int ix = -2; ix <= 2; ++ix) {
    for (int iy = -2; iy <= 2; ++iy) {
      for (int it = -2; it <= 2; ++it) {
        if (ix == 0 && iy == 0 && it == 0) continue;
        const Pose2 zp{eq.z_star.x + 1e-4 * ix, eq.z_star.y + 1e-4 * iy,
                       eq.z_star.theta + 1.7e-3 * it};
        CHECK(potential(w, zp, u) >= w_star - 1e-12);
      }
    }
  }
}

TEST_CASE("rollout bookkeeping and slip detection") {
  // peg resting on the plate next to the hole; the controls keep descending,
  // so the handle springs build tangential force against a weak grip
  WorldConfig w = small_world();
  w.mu_handle = 0.05;
  CostWeights weights;
  const double x0 = 0.02;  // on solid material, away from the mouth
  const Pose2 z0{x0, 0.0061, 0.0};
  std::vector<ControlPair> controls;
  const double squeeze = 0.002;
  for (int k = 0; k <= 50; ++k) {
    const double uy = 0.006 - 1e-4 * k;  // sinks 5 mm below the resting height
    controls.push_back({Vec2(x0 - w.peg.half_width + squeeze, uy),
                        Vec2(x0 + w.peg.half_width - squeeze, uy)});
  }
  RolloutOptions opts;
  opts.duration = 5.0;
  const Trajectory traj = rollout(w, controls, z0, weights, opts);
  REQUIRE(traj.size() == controls.size());
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == doctest::Approx(5.0));
  int slips = 0;
  for (auto f : traj.slip_flags) slips += f;
  CHECK(slips > 0);
  // the plate stops the peg: it never follows the controls below the surface
  CHECK(traj.states.back().y > 0.0055);

  // strict mode stops at the first slip
  RolloutOptions strict = opts;
  strict.strict_slip = true;
  const Trajectory t2 = rollout(w, controls, z0, weights, strict);
  CHECK(t2.size() < controls.size());
  CHECK(t2.slip_flags.back() == 1);
}

TEST_CASE("warm-started rollout follows the equilibrium branch continuously") {
  const WorldConfig w = free_world();
  CostWeights weights;
  std::vector<ControlPair> controls;
  for (int k = 0; k <= 80; ++k) {
    const double ang = 0.02 * k;  // slow rotation of the control axis
    const Vec2 axis(std::cos(ang), std::sin(ang));
    controls.push_back({-0.05 * axis, 0.05 * axis});
  }
  const Trajectory traj = rollout(w, controls, Pose2{0.0, 0.0, 0.0}, weights, {});
  for (size_t k = 1; k < traj.size(); ++k) {
    CHECK(std::abs(traj.states[k].theta - traj.states[k - 1].theta) < 0.1);
    CHECK(traj.equilibria[k].converged);
  }
  // total rotation tracked without wrapping: theta ends near 1.6 rad
  CHECK(traj.states.back().theta == doctest::Approx(1.6).epsilon(0.05));
}
