#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mcplan/costs.hpp"

namespace mcplan {

enum class UpdateStrategy { Elite, RewardWeighted };

struct BboOptions {
  int candidate_count{15};  // R
  int max_iterations{100};
  UpdateStrategy strategy{UpdateStrategy::Elite};
  double init_sigma{20.0};
  double sigma_decay{0.98};
  double reward_shape{10.0};  // h in the reward-weighted exponent
  double cost_cap{1e6};
  double convergence_tol{1e-4};
  int convergence_window{10};
  uint64_t seed{0};
};

struct IterationRecord {
  int iteration{0};
  double best_cost{0.0};
  double mean_cost{0.0};
  double exploration_sigma{0.0};
  CostBreakdown best_breakdown;
};

struct OptimizerState {
  Eigen::MatrixXd mean_theta;
  Eigen::MatrixXd best_theta;
  double best_cost{std::numeric_limits<double>::infinity()};
  double exploration_sigma{0.0};
  int iteration{0};
  uint64_t rng_seed{0};
  std::vector<IterationRecord> history;
};

/// R Gaussian draws around the incumbent mean; draw 0 is always the
/// unperturbed mean. Deterministic in (rng_seed, iteration).
std::vector<Eigen::MatrixXd> sample_candidates(const OptimizerState& state, int count);

/// Incumbent update: ELITE picks the argmin candidate, REWARD-WEIGHTED takes
/// a softmax-weighted average. Both decay the exploration deviation.
void update(OptimizerState& state, const std::vector<Eigen::MatrixXd>& candidates,
            const std::vector<double>& costs, const BboOptions& opts);

struct CandidateEval {
  double cost{0.0};
  CostBreakdown breakdown;
};

/// Evaluates a whole candidate batch; implementations may parallelize
/// internally but must return results in candidate order.
using BatchEvaluator =
    std::function<std::vector<CandidateEval>(const std::vector<Eigen::MatrixXd>&)>;

/// Sample -> evaluate -> update loop; stops at max_iterations or when the
/// best cost stalls over the convergence window.
OptimizerState run_bbo(const BboOptions& opts, int dof_count, int basis_count,
                       const BatchEvaluator& evaluate);

}  // namespace mcplan
