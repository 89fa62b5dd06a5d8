// Benchmarks the serial vs OpenMP evaluation of the (candidate, scenario)
// rollout grid and checks that both schedules produce bit-identical costs.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include <fmt/core.h>

#include "mcplan/config.hpp"
#include "mcplan/experiments.hpp"
#include "mcplan/optimizer.hpp"
#include "mcplan/rng.hpp"

using namespace mcplan;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ExperimentConfig bench_config() {
  ExperimentConfig cfg;
  cfg.world.peg.half_width = 0.0375;
  cfg.world.peg.half_height = 0.0375;
  HoleEntry hole;
  hole.width = 0.076;
  hole.depth = 0.03;
  hole.chamfer_width = 0.256 * cfg.world.peg.width();
  cfg.world.hole.holes = {hole};
  cfg.world.finalize();
  cfg.dmp.steps = 100;
  cfg.bbo.seed = 7;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  ExperimentConfig cfg = bench_config();

  const ScenarioSet set =
      sample_scenarios(cfg.world.hole.mouth_center, cfg.scenario.sigma(), cfg.scenario_count,
                       42, true, cfg.scenario.weighting);
  const std::vector<ScenarioContext> contexts = make_scenario_contexts(cfg, set);

  OptimizerState state;
  state.mean_theta = Eigen::MatrixXd::Zero(kControlDof, cfg.dmp.basis_count);
  state.exploration_sigma = cfg.bbo.init_sigma;
  state.rng_seed = cfg.bbo.seed;
  const std::vector<Eigen::MatrixXd> candidates =
      sample_candidates(state, cfg.bbo.candidate_count);

  const int threads = configured_threads();
  fmt::print("grid: {} candidates x {} scenarios, {} steps, {} thread(s)\n", candidates.size(),
             contexts.size(), cfg.dmp.steps, threads);

  double t_serial = 0.0, t_parallel = 0.0;
  std::vector<CandidateEval> serial, parallel;
  for (int rep = 0; rep < repeats; ++rep) {
    auto t0 = Clock::now();
    serial = evaluate_grid_serial(cfg, contexts, candidates);
    t_serial += seconds_since(t0);

    t0 = Clock::now();
    parallel = evaluate_grid_parallel(cfg, contexts, candidates, threads);
    t_parallel += seconds_since(t0);
  }
  t_serial /= repeats;
  t_parallel /= repeats;

  bool identical = serial.size() == parallel.size();
  for (size_t r = 0; identical && r < serial.size(); ++r) {
    identical = serial[r].cost == parallel[r].cost &&
                serial[r].breakdown.total == parallel[r].breakdown.total;
  }

  fmt::print("serial:   {:.3f} s/grid\n", t_serial);
  fmt::print("parallel: {:.3f} s/grid  (speedup {:.2f}x)\n", t_parallel, t_serial / t_parallel);
  fmt::print("bit-identical: {}\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
