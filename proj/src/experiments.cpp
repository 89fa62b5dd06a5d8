#include "mcplan/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#ifdef MCPLAN_HAS_OPENMP
#include <omp.h>
#endif

#include "mcplan/rng.hpp"

namespace mcplan {

namespace {

constexpr uint64_t kScenarioSalt = 0x5ce4a9;

Eigen::Vector4d pack(const ControlPair& u) {
  return Eigen::Vector4d(u.u1.x(), u.u1.y(), u.u2.x(), u.u2.y());
}

CostBreakdown accumulate(CostBreakdown acc, const CostBreakdown& b, double w) {
  acc.kinematic += w * b.kinematic;
  acc.friction += w * b.friction;
  acc.energy += w * b.energy;
  acc.stability += w * b.stability;
  acc.regularization += w * b.regularization;
  acc.total += w * b.total;
  return acc;
}

}  // namespace

int configured_threads() {
#ifdef MCPLAN_HAS_OPENMP
  if (const char* env = std::getenv("MCPLAN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) return 1;
    return static_cast<int>(v);
  }
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Pose2 target_pose(const WorldConfig& world, double press) {
  double hole_x = 0.0;
  for (const HoleEntry& h : world.hole.holes) hole_x += h.offset;
  hole_x /= static_cast<double>(world.hole.holes.size());

  double prong_x = 0.0;
  if (!world.peg.prongs.empty()) {
    for (const Prong& p : world.peg.prongs) prong_x += p.offset;
    prong_x /= static_cast<double>(world.peg.prongs.size());
  }

  Pose2 local;
  local.x = hole_x - prong_x;
  local.y = -(world.hole.primary().depth + press) - world.peg.tip_y();
  local.theta = 0.0;
  return compose(world.hole.mouth_center, local);
}

ControlPair grasp_controls(const PegShape& peg, const Pose2& z, double squeeze) {
  const auto [c1, c2] = handle_contact_points(peg, z);
  const auto [n1, n2] = handle_normals(z);
  return ControlPair{c1 - squeeze * n1, c2 - squeeze * n2};
}

DmpParams make_dmp(const ExperimentConfig& cfg, const Eigen::MatrixXd& theta) {
  DmpParams p;
  p.theta = theta;
  p.basis_count = cfg.dmp.basis_count;
  p.duration = cfg.dmp.duration;
  p.alpha_u = cfg.dmp.alpha_u;
  p.beta_u = cfg.dmp.alpha_u / 4.0;
  p.alpha_x = cfg.dmp.alpha_x;
  p.u0 = pack(grasp_controls(cfg.world.peg, cfg.start.z0, cfg.start.squeeze));
  p.uT = pack(grasp_controls(cfg.world.peg, target_pose(cfg.world, cfg.task.insertion_press),
                             cfg.start.squeeze));
  p.validate();
  return p;
}

WorldConfig world_with_hole_pose(const WorldConfig& world, const Pose2& hole_pose) {
  WorldConfig w = world;
  w.hole.mouth_center = hole_pose;
  return w;
}

std::vector<ScenarioContext> make_scenario_contexts(const ExperimentConfig& cfg,
                                                    const ScenarioSet& set) {
  std::vector<ScenarioContext> out;
  out.reserve(set.scenarios.size());
  for (const Scenario& s : set.scenarios) {
    ScenarioContext ctx;
    ctx.world = world_with_hole_pose(cfg.world, s.hole_pose);
    ctx.z_target = target_pose(ctx.world, cfg.task.insertion_press);
    ctx.weight = s.weight;
    out.push_back(std::move(ctx));
  }
  return out;
}

namespace {

/// Cost of one control tape in one scenario world.
std::pair<double, CostBreakdown> scenario_eval(const ExperimentConfig& cfg,
                                               const ScenarioContext& ctx,
                                               const std::vector<ControlPair>& controls,
                                               const Eigen::MatrixXd& theta) {
  RolloutOptions ropts;
  ropts.duration = cfg.dmp.duration;
  const Trajectory traj = rollout(ctx.world, controls, cfg.start.z0, cfg.weights, ropts);
  const CostBreakdown b = total_cost(traj, cfg.weights, theta, ctx.z_target);
  return {b.total, b};
}

CandidateEval reduce_candidate(const std::vector<ScenarioContext>& contexts,
                               const std::pair<double, CostBreakdown>* per_scenario) {
  std::vector<std::pair<double, double>> weighted;
  weighted.reserve(contexts.size());
  CandidateEval out;
  for (size_t s = 0; s < contexts.size(); ++s) {
    weighted.emplace_back(contexts[s].weight, per_scenario[s].first);
    out.breakdown = accumulate(out.breakdown, per_scenario[s].second, contexts[s].weight);
  }
  out.cost = scenario_cost(weighted);
  return out;
}

}  // namespace

CandidateEval evaluate_candidate(const ExperimentConfig& cfg,
                                 const std::vector<ScenarioContext>& contexts,
                                 const Eigen::MatrixXd& theta) {
  const std::vector<ControlPair> controls = generate(make_dmp(cfg, theta), cfg.dmp.steps);
  std::vector<std::pair<double, CostBreakdown>> per(contexts.size());
  for (size_t s = 0; s < contexts.size(); ++s) {
    per[s] = scenario_eval(cfg, contexts[s], controls, theta);
  }
  return reduce_candidate(contexts, per.data());
}

std::vector<CandidateEval> evaluate_grid_serial(const ExperimentConfig& cfg,
                                                const std::vector<ScenarioContext>& contexts,
                                                const std::vector<Eigen::MatrixXd>& candidates) {
  std::vector<CandidateEval> out;
  out.reserve(candidates.size());
  for (const Eigen::MatrixXd& theta : candidates) {
    out.push_back(evaluate_candidate(cfg, contexts, theta));
  }
  return out;
}

std::vector<CandidateEval> evaluate_grid_parallel(const ExperimentConfig& cfg,
                                                  const std::vector<ScenarioContext>& contexts,
                                                  const std::vector<Eigen::MatrixXd>& candidates,
                                                  int threads) {
  const int R = static_cast<int>(candidates.size());
  const int S = static_cast<int>(contexts.size());

  std::vector<std::vector<ControlPair>> tapes;
  tapes.reserve(candidates.size());
  for (const Eigen::MatrixXd& theta : candidates) {
    tapes.push_back(generate(make_dmp(cfg, theta), cfg.dmp.steps));
  }

  std::vector<std::pair<double, CostBreakdown>> grid(static_cast<size_t>(R) * S);
#ifdef MCPLAN_HAS_OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(threads, 1))
#endif
  for (int idx = 0; idx < R * S; ++idx) {
    const int r = idx / S;
    const int s = idx % S;
    grid[idx] = scenario_eval(cfg, contexts[s], tapes[r], candidates[r]);
  }
#ifndef MCPLAN_HAS_OPENMP
  (void)threads;
#endif

  std::vector<CandidateEval> out;
  out.reserve(candidates.size());
  for (int r = 0; r < R; ++r) {
    out.push_back(reduce_candidate(contexts, grid.data() + static_cast<size_t>(r) * S));
  }
  return out;
}

TrainResult train_policy(const ExperimentConfig& cfg) {
  TrainResult result;
  result.scenarios = sample_scenarios(cfg.world.hole.mouth_center, cfg.scenario.sigma(),
                                      cfg.scenario_count, Rng::mix(cfg.bbo.seed, kScenarioSalt),
                                      cfg.scenario.include_nominal, cfg.scenario.weighting);
  const std::vector<ScenarioContext> contexts = make_scenario_contexts(cfg, result.scenarios);

  const int threads = configured_threads();
  const BatchEvaluator evaluate = [&](const std::vector<Eigen::MatrixXd>& candidates) {
    if (threads > 1) return evaluate_grid_parallel(cfg, contexts, candidates, threads);
    return evaluate_grid_serial(cfg, contexts, candidates);
  };
  result.state = run_bbo(cfg.bbo, kControlDof, cfg.dmp.basis_count, evaluate);
  result.policy = make_dmp(cfg, result.state.best_theta);
  return result;
}

RolloutReport run_policy(const ExperimentConfig& cfg, const DmpParams& policy,
                         const WorldConfig& world) {
  RolloutReport rep;
  const std::vector<ControlPair> controls = generate(policy, cfg.dmp.steps);
  RolloutOptions ropts;
  ropts.duration = policy.duration;
  rep.trajectory = rollout(world, controls, cfg.start.z0, cfg.weights, ropts);
  rep.metrics = evaluate_success(rep.trajectory, world, cfg.success);
  rep.cost = total_cost(rep.trajectory, cfg.weights, policy.theta,
                        target_pose(world, cfg.task.insertion_press));

  rep.min_det_scaled = std::numeric_limits<double>::infinity();
  double stretch = 0.0;
  for (size_t k = 0; k < rep.trajectory.size(); ++k) {
    const auto [c1, c2] = handle_contact_points(world.peg, rep.trajectory.states[k]);
    const ControlPair& u = rep.trajectory.controls[k];
    stretch += 0.5 * ((u.u1 - c1).norm() + (u.u2 - c2).norm());
    if ((u.u1 - u.u2).dot(c1 - c2) < 0.0) ++rep.crossing_steps;
    rep.min_det_scaled = std::min(rep.min_det_scaled, rep.trajectory.equilibria[k].det_scaled);
  }
  if (!rep.trajectory.times.empty()) {
    rep.mean_stretch = stretch / static_cast<double>(rep.trajectory.size());
  } else {
    rep.min_det_scaled = 0.0;
  }
  return rep;
}

namespace {

ExperimentConfig with_chamfer_ratio(const ExperimentConfig& cfg, double ratio) {
  ExperimentConfig out = cfg;
  const double peg_width = cfg.world.peg.width();
  for (HoleEntry& h : out.world.hole.holes) h.chamfer_width = ratio * peg_width;
  out.world.finalize();
  return out;
}

int count_successes(const ExperimentConfig& cfg, const DmpParams& policy,
                    const ScenarioSet& draws) {
  int successes = 0;
  for (const Scenario& s : draws.scenarios) {
    const WorldConfig true_world = world_with_hole_pose(cfg.world, s.hole_pose);
    if (run_policy(cfg, policy, true_world).metrics.success) ++successes;
  }
  return successes;
}

ScenarioSet eval_draws(const ExperimentConfig& cfg) {
  // The same draw set is reused for every chamfer ratio so the study is a
  // paired comparison: each ratio sees identical true-pose perturbations.
  return sample_scenarios(cfg.world.hole.mouth_center, cfg.scenario.sigma(),
                          cfg.study.eval_draws, Rng::mix(cfg.study.eval_seed, 0x9e11),
                          /*include_nominal=*/false, cfg.scenario.weighting);
}

}  // namespace

std::vector<CompareRow> run_compare(const ExperimentConfig& cfg) {
  std::vector<CompareRow> rows;
  for (size_t i = 0; i < cfg.study.chamfer_ratios.size(); ++i) {
    const double ratio = cfg.study.chamfer_ratios[i];
    const ExperimentConfig cfg_r = with_chamfer_ratio(cfg, ratio);

    ExperimentConfig cfg_base = cfg_r;
    cfg_base.scenario_count = 1;  // base DMP: trust the estimated pose
    const TrainResult base = train_policy(cfg_base);
    const TrainResult robust = train_policy(cfg_r);

    const ScenarioSet draws = eval_draws(cfg_r);
    CompareRow row;
    row.chamfer_ratio = ratio;
    row.draws = static_cast<int>(draws.scenarios.size());
    row.base_successes = count_successes(cfg_r, base.policy, draws);
    row.robust_successes = count_successes(cfg_r, robust.policy, draws);
    rows.push_back(row);
  }
  return rows;
}

FrictionSweepResult run_friction_sweep(const ExperimentConfig& cfg,
                                       const std::vector<double>& mus) {
  FrictionSweepResult result;
  std::vector<DmpParams> policies;
  std::vector<ExperimentConfig> configs;
  for (double mu : mus) {
    ExperimentConfig cfg_mu = cfg;
    cfg_mu.world.mu_handle = mu;
    cfg_mu.world.mu_env = mu;
    const TrainResult trained = train_policy(cfg_mu);
    const RolloutReport rep = run_policy(cfg_mu, trained.policy, cfg_mu.world);

    FrictionRow row;
    row.mu = mu;
    row.mean_stretch = rep.mean_stretch;
    row.slip_events = rep.metrics.slip_events;
    row.success = rep.metrics.success;
    row.best_cost = trained.state.best_cost;
    result.rows.push_back(row);
    policies.push_back(trained.policy);
    configs.push_back(cfg_mu);
  }
  if (mus.size() >= 2) {
    // Policy trained at the last (high) mu executed in the first (low) mu world.
    const RolloutReport cross = run_policy(configs.front(), policies.back(), configs.front().world);
    result.cross_slip_events = cross.metrics.slip_events;
    result.cross_success = cross.metrics.success;
  }
  return result;
}

AblationResult run_stability_ablation(const ExperimentConfig& cfg) {
  ExperimentConfig ablated_cfg = cfg;
  ablated_cfg.weights.alpha4 = 0.0;

  const TrainResult with_stability = train_policy(cfg);
  const TrainResult without_stability = train_policy(ablated_cfg);
  const RolloutReport rep_default = run_policy(cfg, with_stability.policy, cfg.world);
  const RolloutReport rep_ablated = run_policy(ablated_cfg, without_stability.policy, cfg.world);

  AblationResult out;
  out.default_instability = rep_default.metrics.instability_events;
  out.ablated_instability = rep_ablated.metrics.instability_events;
  out.default_crossings = rep_default.crossing_steps;
  out.ablated_crossings = rep_ablated.crossing_steps;
  out.default_min_det = rep_default.min_det_scaled;
  out.ablated_min_det = rep_ablated.min_det_scaled;
  return out;
}

std::vector<ChamferRow> run_chamfer_sweep(const ExperimentConfig& cfg, const DmpParams& policy) {
  std::vector<ChamferRow> rows;
  for (size_t i = 0; i < cfg.study.chamfer_ratios.size(); ++i) {
    const double ratio = cfg.study.chamfer_ratios[i];
    const ExperimentConfig cfg_r = with_chamfer_ratio(cfg, ratio);
    const ScenarioSet draws = eval_draws(cfg_r);
    ChamferRow row;
    row.chamfer_ratio = ratio;
    row.draws = static_cast<int>(draws.scenarios.size());
    row.successes = count_successes(cfg_r, policy, draws);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mcplan
