#include "mcplan/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcplan/rng.hpp"

namespace mcplan {

std::vector<Eigen::MatrixXd> sample_candidates(const OptimizerState& state, int count) {
  if (count < 2) throw std::invalid_argument("sample_candidates: need at least 2 candidates");
  std::vector<Eigen::MatrixXd> out;
  out.reserve(count);
  out.push_back(state.mean_theta);  // elite preservation
  for (int r = 1; r < count; ++r) {
    Rng rng(Rng::mix(state.rng_seed, Rng::mix(state.iteration, r)));
    Eigen::MatrixXd c = state.mean_theta;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.cols(); ++j) {
        c(i, j) += state.exploration_sigma * rng.normal();
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

void update(OptimizerState& state, const std::vector<Eigen::MatrixXd>& candidates,
            const std::vector<double>& costs, const BboOptions& opts) {
  if (candidates.size() != costs.size() || candidates.empty()) {
    throw std::invalid_argument("update: candidates and costs must match");
  }
  const size_t n = costs.size();
  size_t best_idx = 0;
  double lo = costs[0], hi = costs[0];
  for (size_t r = 1; r < n; ++r) {
    if (costs[r] < lo) {
      lo = costs[r];
      best_idx = r;
    }
    hi = std::max(hi, costs[r]);
  }

  if (opts.strategy == UpdateStrategy::Elite) {
    state.mean_theta = candidates[best_idx];
  } else {
    const double span = hi - lo + 1e-12;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(candidates[0].rows(), candidates[0].cols());
    double total = 0.0;
    for (size_t r = 0; r < n; ++r) {
      const double w = std::exp(-opts.reward_shape * (costs[r] - lo) / span);
      acc += w * candidates[r];
      total += w;
    }
    state.mean_theta = acc / total;
  }

  if (costs[best_idx] < state.best_cost) {
    state.best_cost = costs[best_idx];
    state.best_theta = candidates[best_idx];
  }
  state.exploration_sigma *= opts.sigma_decay;
  ++state.iteration;
}

OptimizerState run_bbo(const BboOptions& opts, int dof_count, int basis_count,
                       const BatchEvaluator& evaluate) {
  OptimizerState state;
  state.mean_theta = Eigen::MatrixXd::Zero(dof_count, basis_count);
  state.best_theta = state.mean_theta;
  state.exploration_sigma = opts.init_sigma;
  state.rng_seed = opts.seed;

  int stalled = 0;
  double prev_best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    const std::vector<Eigen::MatrixXd> candidates =
        sample_candidates(state, opts.candidate_count);
    std::vector<CandidateEval> evals = evaluate(candidates);
    if (evals.size() != candidates.size()) {
      throw std::logic_error("run_bbo: evaluator returned wrong batch size");
    }
    std::vector<double> costs(evals.size());
    for (size_t r = 0; r < evals.size(); ++r) {
      double c = evals[r].cost;
      if (!std::isfinite(c) || c > opts.cost_cap) c = opts.cost_cap;
      costs[r] = c;
    }
    size_t best_idx = static_cast<size_t>(
        std::min_element(costs.begin(), costs.end()) - costs.begin());

    update(state, candidates, costs, opts);

    IterationRecord rec;
    rec.iteration = state.iteration;
    rec.best_cost = state.best_cost;
    rec.mean_cost = 0.0;
    for (double c : costs) rec.mean_cost += c;
    rec.mean_cost /= static_cast<double>(costs.size());
    rec.exploration_sigma = state.exploration_sigma;
    rec.best_breakdown = evals[best_idx].breakdown;
    state.history.push_back(rec);

    const double rel_improvement =
        (prev_best - state.best_cost) / std::max(std::abs(prev_best), 1e-12);
    stalled = rel_improvement < opts.convergence_tol ? stalled + 1 : 0;
    prev_best = state.best_cost;
    if (stalled >= opts.convergence_window) break;
  }
  return state;
}

}  // namespace mcplan
