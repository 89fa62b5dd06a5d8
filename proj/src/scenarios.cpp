#include "mcplan/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcplan/rng.hpp"

namespace mcplan {

ScenarioSet sample_scenarios(const Pose2& nominal, const Vec3& sigma, int count,
                             uint64_t seed, bool include_nominal,
                             ScenarioWeighting weighting) {
  if (count < 1) throw std::invalid_argument("scenario count must be >= 1");
  if (sigma.minCoeff() < 0.0) throw std::invalid_argument("scenario sigma must be >= 0");

  ScenarioSet set;
  set.nominal = nominal;
  set.sigma = sigma;
  set.seed = seed;
  set.scenarios.reserve(count);

  Rng rng(Rng::mix(seed, 0x5ce4a9u));
  for (int s = 0; s < count; ++s) {
    Vec3 d = Vec3::Zero();
    if (!(include_nominal && s == 0)) {
      d(0) = sigma.x() * rng.normal();
      d(1) = sigma.y() * rng.normal();
      d(2) = sigma.z() * rng.normal();
    }
    Scenario sc;
    sc.hole_pose = Pose2{nominal.x + d(0), nominal.y + d(1), nominal.theta + d(2)};
    if (weighting == ScenarioWeighting::DensityProportional) {
      double q = 0.0;
      for (int i = 0; i < 3; ++i) {
        if (sigma(i) > 0.0) q += (d(i) / sigma(i)) * (d(i) / sigma(i));
      }
      sc.weight = std::exp(-0.5 * q);
    } else {
      sc.weight = 1.0;
    }
    set.scenarios.push_back(sc);
  }
  double total = 0.0;
  for (const Scenario& sc : set.scenarios) total += sc.weight;
  for (Scenario& sc : set.scenarios) sc.weight /= total;
  return set;
}

SuccessMetrics evaluate_success(const Trajectory& traj, const WorldConfig& true_world,
                                const SuccessThresholds& thresholds) {
  if (traj.states.empty()) throw std::invalid_argument("evaluate_success: empty trajectory");
  SuccessMetrics m;
  const Pose2& z_final = traj.states.back();
  const Pose2 hole_frame = true_world.hole.mouth_center.inverse();
  const HoleEntry& hole = true_world.hole.primary();

  // deepest boundary point below the true hole mouth
  double min_y = std::numeric_limits<double>::infinity();
  for (const Vec2& bp : true_world.peg.outline()) {
    min_y = std::min(min_y, hole_frame.apply(z_final.apply(bp)).y());
  }
  m.depth_fraction = std::max(0.0, -min_y) / hole.depth;
  const Vec2 center = hole_frame.apply(z_final.translation());
  m.lateral_offset = std::abs(center.x() - hole.offset);
  m.tilt = std::abs(Pose2::wrap_angle(z_final.theta - true_world.hole.mouth_center.theta));

  for (size_t k = 0; k < traj.size(); ++k) {
    if (traj.slip_flags[k]) ++m.slip_events;
    if (traj.instability_flags[k]) ++m.instability_events;
  }
  const size_t n = traj.size();
  const size_t tail = std::min<size_t>(n, static_cast<size_t>(thresholds.clean_tail_steps));
  for (size_t k = n - tail; k < n; ++k) {
    if (!traj.equilibria[k].converged) m.clean_tail = false;
  }
  m.success = m.depth_fraction >= thresholds.depth_fraction &&
              m.tilt <= thresholds.tilt_rad && m.clean_tail;
  return m;
}

}  // namespace mcplan
