#pragma once

#include <functional>
#include <vector>

#include "mcplan/config.hpp"
#include "mcplan/optimizer.hpp"
#include "mcplan/policy.hpp"
#include "mcplan/scenarios.hpp"

namespace mcplan {

/// Threads requested via MCPLAN_THREADS (OpenMP default when unset, 1 when
/// unparsable or OpenMP is unavailable).
int configured_threads();

/// Desired peg pose with the tip pressed `press` past the hole floor,
/// aligned with the plate axis.
Pose2 target_pose(const WorldConfig& world, double press);

/// Spring anchors displaced `squeeze` inward from the handle points, so both
/// arms push against the peg sides.
ControlPair grasp_controls(const PegShape& peg, const Pose2& z, double squeeze);

/// DMP with boundary conditions from the start grasp and the *estimated*
/// (nominal) target grasp; theta left for the optimizer.
DmpParams make_dmp(const ExperimentConfig& cfg, const Eigen::MatrixXd& theta);

/// One hypothesis world per scenario: same bodies, true hole pose moved, and
/// the kinematic target recomputed against that true pose.
struct ScenarioContext {
  WorldConfig world;
  Pose2 z_target;
  double weight{1.0};
};

std::vector<ScenarioContext> make_scenario_contexts(const ExperimentConfig& cfg,
                                                    const ScenarioSet& set);

/// Cost of one candidate: generates the control tape once, rolls it out in
/// every scenario world, and aggregates per-scenario totals by weight.
CandidateEval evaluate_candidate(const ExperimentConfig& cfg,
                                 const std::vector<ScenarioContext>& contexts,
                                 const Eigen::MatrixXd& theta);

/// Serial reference for the R x S evaluation grid.
std::vector<CandidateEval> evaluate_grid_serial(const ExperimentConfig& cfg,
                                                const std::vector<ScenarioContext>& contexts,
                                                const std::vector<Eigen::MatrixXd>& candidates);

/// OpenMP version over the flattened (candidate, scenario) grid. Reduction is
/// a fixed-order serial pass, so results are bit-identical to the serial
/// schedule for any thread count.
std::vector<CandidateEval> evaluate_grid_parallel(const ExperimentConfig& cfg,
                                                  const std::vector<ScenarioContext>& contexts,
                                                  const std::vector<Eigen::MatrixXd>& candidates,
                                                  int threads);

struct TrainResult {
  OptimizerState state;
  DmpParams policy;
  ScenarioSet scenarios;
};

TrainResult train_policy(const ExperimentConfig& cfg);

struct RolloutReport {
  Trajectory trajectory;
  SuccessMetrics metrics;
  CostBreakdown cost;
  double mean_stretch{0.0};  // trajectory-mean of (|u1-c1| + |u2-c2|)/2 [m]
  int crossing_steps{0};     // steps with (u1-u2).(c1-c2) < 0
  double min_det_scaled{0.0};
};

/// Rolls a policy out in `world` and judges it against that world's hole pose.
RolloutReport run_policy(const ExperimentConfig& cfg, const DmpParams& policy,
                         const WorldConfig& world);

/// Copy of the world with the true plate pose replaced.
WorldConfig world_with_hole_pose(const WorldConfig& world, const Pose2& hole_pose);

struct CompareRow {
  double chamfer_ratio{0.0};
  int draws{0};
  int base_successes{0};
  int robust_successes{0};
};

/// Base (S = 1) vs robust (S = scenario_count) study over the configured
/// chamfer ratios, each judged on study.eval_draws fresh true-pose draws.
std::vector<CompareRow> run_compare(const ExperimentConfig& cfg);

struct FrictionRow {
  double mu{0.0};
  double mean_stretch{0.0};
  int slip_events{0};
  bool success{false};
  double best_cost{0.0};
};

struct FrictionSweepResult {
  std::vector<FrictionRow> rows;  // one per trained mu, input order
  int cross_slip_events{0};       // last-mu policy executed in first-mu world
  bool cross_success{false};
};

FrictionSweepResult run_friction_sweep(const ExperimentConfig& cfg,
                                       const std::vector<double>& mus = {0.05, 0.6});

struct AblationResult {
  int default_instability{0};
  int ablated_instability{0};
  int default_crossings{0};
  int ablated_crossings{0};
  double default_min_det{0.0};
  double ablated_min_det{0.0};
};

/// Default alpha4 vs alpha4 = 0 training, instability/crossing counts on the
/// final policy rollouts.
AblationResult run_stability_ablation(const ExperimentConfig& cfg);

struct ChamferRow {
  double chamfer_ratio{0.0};
  int draws{0};
  int successes{0};
};

/// Evaluates one fixed policy across the configured chamfer ratios.
std::vector<ChamferRow> run_chamfer_sweep(const ExperimentConfig& cfg, const DmpParams& policy);

}  // namespace mcplan
