#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mcplan/mechanics.hpp"
#include "mcplan/optimizer.hpp"
#include "mcplan/policy.hpp"

namespace mcplan {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One JSON object per rollout step: t, u, z, handle forces, contacts,
/// per-term cost samples, and flags.
nlohmann::json trajectory_step_record(const Trajectory& traj, size_t k,
                                      const WorldConfig& world);

void write_trajectory_jsonl(const std::string& path, const Trajectory& traj,
                            const WorldConfig& world);

/// Flat CSV with the documented column order:
/// t,u1x,u1y,u2x,u2y,zx,zy,ztheta,f1x,f1y,f2x,f2y,cost_friction,cost_energy,
/// cost_stability,slip,unstable,converged,det_scaled
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const WorldConfig& world);

/// Re-encodes a trajectory JSON-lines file as CSV without loss of precision.
void export_jsonl_to_csv(const std::string& jsonl_path, const std::string& csv_path);

nlohmann::json policy_to_json(const DmpParams& params);
DmpParams policy_from_json(const nlohmann::json& j);
void write_policy(const std::string& path, const DmpParams& params);
DmpParams read_policy(const std::string& path);

/// JSON-lines training log, one record per BBO iteration.
void write_training_log(const std::string& path, const std::vector<IterationRecord>& history);

void write_json_file(const std::string& path, const nlohmann::json& j);

/// Shortest round-trip decimal form of a double (matches the JSON encoding).
std::string format_number(double v);

}  // namespace mcplan
