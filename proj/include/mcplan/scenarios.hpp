#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcplan/mechanics.hpp"

namespace mcplan {

enum class ScenarioWeighting { Uniform, DensityProportional };

struct Scenario {
  Pose2 hole_pose;  // sampled true plate pose
  double weight{1.0};
};

/// Target-uncertainty model: perturbed plate poses drawn around the
/// estimated pose, with normalized per-scenario weights.
struct ScenarioSet {
  Pose2 nominal;
  Vec3 sigma{0.0, 0.0, 0.0};  // (sigma_x [m], sigma_y [m], sigma_theta [rad])
  std::vector<Scenario> scenarios;
  uint64_t seed{0};
};

ScenarioSet sample_scenarios(const Pose2& nominal, const Vec3& sigma, int count,
                             uint64_t seed, bool include_nominal = true,
                             ScenarioWeighting weighting = ScenarioWeighting::Uniform);

struct SuccessThresholds {
  double depth_fraction{0.8};
  double tilt_rad{3.0 * M_PI / 180.0};
  int clean_tail_steps{10};
};

struct SuccessMetrics {
  bool success{false};
  double depth_fraction{0.0};
  double lateral_offset{0.0};  // [m], peg center vs hole axis
  double tilt{0.0};            // [rad], wrapped
  int slip_events{0};
  int instability_events{0};
  bool clean_tail{true};
};

/// Judges insertion against the true hole pose at the trajectory's final step.
SuccessMetrics evaluate_success(const Trajectory& traj, const WorldConfig& true_world,
                                const SuccessThresholds& thresholds);

}  // namespace mcplan
