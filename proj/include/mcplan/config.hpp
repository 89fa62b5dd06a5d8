#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcplan/mechanics.hpp"
#include "mcplan/optimizer.hpp"
#include "mcplan/scenarios.hpp"

namespace mcplan {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DmpConfig {
  int basis_count{10};
  double duration{5.0};
  double alpha_u{25.0};
  double alpha_x{4.0};
  int steps{200};  // N control intervals per trajectory
};

struct ScenarioConfig {
  double sigma_x{0.34e-3};
  double sigma_y{0.34e-3};
  double sigma_theta{3.63 * M_PI / 180.0};
  bool include_nominal{true};
  ScenarioWeighting weighting{ScenarioWeighting::Uniform};

  Vec3 sigma() const { return Vec3(sigma_x, sigma_y, sigma_theta); }
};

struct StartConfig {
  Pose2 z0{0.0, 0.06, 0.0};
  double squeeze{0.025};  // initial/terminal grasp squeeze depth [m]
};

struct TaskConfig {
  /// How far past the hole floor the target tip pose is placed, so the
  /// policy seats the peg instead of hovering at zero contact force.
  double insertion_press{0.002};
};

struct StudyConfig {
  std::vector<double> chamfer_ratios{0.385, 0.256, 0.128};
  int eval_draws{20};
  uint64_t eval_seed{1234};
};

struct ExperimentConfig {
  int schema_version{1};
  WorldConfig world;
  CostWeights weights;
  DmpConfig dmp;
  BboOptions bbo;
  int scenario_count{20};  // S
  ScenarioConfig scenario;
  SuccessThresholds success;
  StartConfig start;
  TaskConfig task;
  StudyConfig study;
  std::string output_dir{"out"};
};

/// Strict parse: unknown keys and invalid values raise ConfigError naming the
/// offending path.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Applies a dotted-path override like "world.friction.handle=0.05" to the
/// raw JSON document before parsing.
void apply_override(nlohmann::json& j, const std::string& key_value);

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

}  // namespace mcplan
