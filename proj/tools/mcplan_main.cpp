#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "mcplan/config.hpp"
#include "mcplan/experiments.hpp"
#include "mcplan/io.hpp"

namespace fs = std::filesystem;
using namespace mcplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  int64_t seed{-1};

  void attach(CLI::App* cmd, bool config_required = true) {
    cmd->add_option("--config", config_path, "Experiment config JSON")->required(config_required);
    cmd->add_option("--seed", seed, "Override the optimizer seed");
    cmd->add_option("--out", out_dir, "Output directory (overrides config)");
    cmd->add_option("--override", overrides, "Dotted-path config override KEY=VALUE");
  }

  ExperimentConfig load() const {
    ExperimentConfig cfg = load_config(config_path, overrides);
    if (seed >= 0) cfg.bbo.seed = static_cast<uint64_t>(seed);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    return cfg;
  }
};

std::string prepare_out_dir(const ExperimentConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.output_dir);
  return cfg.output_dir;
}

nlohmann::json metrics_to_json(const SuccessMetrics& m) {
  return {{"success", m.success},
          {"depth_fraction", m.depth_fraction},
          {"lateral_offset", m.lateral_offset},
          {"tilt", m.tilt},
          {"slip_events", m.slip_events},
          {"instability_events", m.instability_events},
          {"clean_tail", m.clean_tail}};
}

nlohmann::json breakdown_to_json(const CostBreakdown& b) {
  return {{"kinematic", b.kinematic},   {"friction", b.friction},
          {"energy", b.energy},         {"stability", b.stability},
          {"regularization", b.regularization}, {"total", b.total}};
}

int cmd_train(const CommonArgs& args) {
  const ExperimentConfig cfg = args.load();
  const std::string out = prepare_out_dir(cfg);

  const TrainResult trained = train_policy(cfg);
  const RolloutReport nominal = run_policy(cfg, trained.policy, cfg.world);

  write_policy(out + "/policy.json", trained.policy);
  write_training_log(out + "/training_log.jsonl", trained.state.history);
  write_json_file(out + "/summary.json",
                  {{"iterations", trained.state.iteration},
                   {"best_cost", trained.state.best_cost},
                   {"cost_breakdown", breakdown_to_json(nominal.cost)},
                   {"nominal_metrics", metrics_to_json(nominal.metrics)},
                   {"mean_stretch", nominal.mean_stretch},
                   {"scenario_count", trained.scenarios.scenarios.size()}});
  fmt::print("trained: best_cost={} iterations={} nominal_success={}\n",
             trained.state.best_cost, trained.state.iteration, nominal.metrics.success);
  return kExitOk;
}

int cmd_rollout(const CommonArgs& args, const std::string& policy_path) {
  const ExperimentConfig cfg = args.load();

  DmpParams policy;
  try {
    policy = read_policy(policy_path);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitConfig;
  }

  const std::string out = prepare_out_dir(cfg);
  const RolloutReport rep = run_policy(cfg, policy, cfg.world);
  write_trajectory_jsonl(out + "/trajectory.jsonl", rep.trajectory, cfg.world);
  write_trajectory_csv(out + "/trajectory.csv", rep.trajectory, cfg.world);
  write_json_file(out + "/metrics.json", {{"metrics", metrics_to_json(rep.metrics)},
                                          {"cost_breakdown", breakdown_to_json(rep.cost)},
                                          {"mean_stretch", rep.mean_stretch},
                                          {"crossing_steps", rep.crossing_steps},
                                          {"min_det_scaled", rep.min_det_scaled}});
  fmt::print("rollout: success={} slip_events={} depth_fraction={}\n", rep.metrics.success,
             rep.metrics.slip_events, rep.metrics.depth_fraction);
  return kExitOk;
}

int cmd_compare(const CommonArgs& args) {
  const ExperimentConfig cfg = args.load();
  const std::string out = prepare_out_dir(cfg);

  const std::vector<CompareRow> rows = run_compare(cfg);
  nlohmann::json jrows = nlohmann::json::array();
  std::string csv = "chamfer_ratio,draws,base_successes,robust_successes\n";
  for (const CompareRow& r : rows) {
    jrows.push_back({{"chamfer_ratio", r.chamfer_ratio},
                     {"draws", r.draws},
                     {"base_successes", r.base_successes},
                     {"robust_successes", r.robust_successes}});
    csv += fmt::format("{},{},{},{}\n", format_number(r.chamfer_ratio), r.draws,
                       r.base_successes, r.robust_successes);
    fmt::print("ratio {}: base {}/{} robust {}/{}\n", r.chamfer_ratio, r.base_successes, r.draws,
               r.robust_successes, r.draws);
  }
  write_json_file(out + "/compare.json", jrows);
  std::ofstream(out + "/compare.csv", std::ios::binary) << csv;
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::string& axis, const std::string& policy_path) {
  const ExperimentConfig cfg = args.load();
  const std::string out = prepare_out_dir(cfg);

  if (axis == "friction") {
    const FrictionSweepResult res = run_friction_sweep(cfg);
    nlohmann::json jrows = nlohmann::json::array();
    std::string csv = "mu,mean_stretch,slip_events,success,best_cost\n";
    for (const FrictionRow& r : res.rows) {
      jrows.push_back({{"mu", r.mu},
                       {"mean_stretch", r.mean_stretch},
                       {"slip_events", r.slip_events},
                       {"success", r.success},
                       {"best_cost", r.best_cost}});
      csv += fmt::format("{},{},{},{},{}\n", format_number(r.mu), format_number(r.mean_stretch),
                         r.slip_events, r.success ? 1 : 0, format_number(r.best_cost));
      fmt::print("mu={}: mean_stretch={} slip_events={} success={}\n", r.mu, r.mean_stretch,
                 r.slip_events, r.success);
    }
    write_json_file(out + "/sweep_friction.json",
                    {{"rows", jrows},
                     {"cross_slip_events", res.cross_slip_events},
                     {"cross_success", res.cross_success}});
    std::ofstream(out + "/sweep_friction.csv", std::ios::binary) << csv;
    fmt::print("cross-test: slip_events={} success={}\n", res.cross_slip_events,
               res.cross_success);
    return kExitOk;
  }
  if (axis == "stability-ablation") {
    const AblationResult res = run_stability_ablation(cfg);
    write_json_file(out + "/sweep_stability.json",
                    {{"default_instability", res.default_instability},
                     {"ablated_instability", res.ablated_instability},
                     {"default_crossings", res.default_crossings},
                     {"ablated_crossings", res.ablated_crossings},
                     {"default_min_det", res.default_min_det},
                     {"ablated_min_det", res.ablated_min_det}});
    fmt::print("stability ablation: default instability={} crossings={}; "
               "ablated instability={} crossings={}\n",
               res.default_instability, res.default_crossings, res.ablated_instability,
               res.ablated_crossings);
    return kExitOk;
  }
  if (axis == "chamfer") {
    DmpParams policy;
    if (!policy_path.empty()) {
      try {
        policy = read_policy(policy_path);
      } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitConfig;
      }
    } else {
      policy = train_policy(cfg).policy;
    }
    const std::vector<ChamferRow> rows = run_chamfer_sweep(cfg, policy);
    nlohmann::json jrows = nlohmann::json::array();
    std::string csv = "chamfer_ratio,draws,successes\n";
    for (const ChamferRow& r : rows) {
      jrows.push_back({{"chamfer_ratio", r.chamfer_ratio},
                       {"draws", r.draws},
                       {"successes", r.successes}});
      csv += fmt::format("{},{},{}\n", format_number(r.chamfer_ratio), r.draws, r.successes);
      fmt::print("ratio {}: {}/{}\n", r.chamfer_ratio, r.successes, r.draws);
    }
    write_json_file(out + "/sweep_chamfer.json", jrows);
    std::ofstream(out + "/sweep_chamfer.csv", std::ios::binary) << csv;
    return kExitOk;
  }
  fmt::print(stderr, "error: unknown sweep axis '{}'\n", axis);
  return kExitConfig;
}

int cmd_export(const std::string& input, const std::string& format, const std::string& out_dir) {
  if (format != "csv") {
    fmt::print(stderr, "error: unknown export format '{}'\n", format);
    return kExitConfig;
  }
  std::error_code ec;
  if (!out_dir.empty()) fs::create_directories(out_dir, ec);
  if (ec) {
    fmt::print(stderr, "error: cannot create output directory: {}\n", out_dir);
    return kExitIo;
  }
  const fs::path in(input);
  const fs::path out =
      (out_dir.empty() ? in.parent_path() : fs::path(out_dir)) / in.stem().concat(".csv");
  if (!fs::exists(in)) {
    fmt::print(stderr, "error: no such trajectory file: {}\n", input);
    return kExitConfig;
  }
  export_jsonl_to_csv(in.string(), out.string());
  fmt::print("exported {}\n", out.string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-static dual-arm peg-in-hole planner"};
  app.require_subcommand(1);

  CommonArgs train_args, rollout_args, compare_args, sweep_args;
  std::string rollout_policy, sweep_axis{"friction"}, sweep_policy;
  std::string export_input, export_format{"csv"}, export_out;

  CLI::App* train = app.add_subcommand("train", "Optimize a DMP policy");
  train_args.attach(train);

  CLI::App* rollout = app.add_subcommand("rollout", "Execute a stored policy");
  rollout_args.attach(rollout);
  rollout->add_option("--policy", rollout_policy, "Policy JSON file")->required();

  CLI::App* compare = app.add_subcommand("compare", "Base vs robust study over chamfer ratios");
  compare_args.attach(compare);

  CLI::App* sweep = app.add_subcommand("sweep", "Parameter sweep study");
  sweep_args.attach(sweep);
  sweep->add_option("--axis", sweep_axis, "friction | chamfer | stability-ablation");
  sweep->add_option("--policy", sweep_policy, "Fixed policy for the chamfer axis");

  CLI::App* exp = app.add_subcommand("export", "Re-encode a trajectory file");
  exp->add_option("--input", export_input, "Trajectory JSON-lines file")->required();
  exp->add_option("--format", export_format, "Output format (csv)");
  exp->add_option("--out", export_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train->parsed()) return cmd_train(train_args);
    if (rollout->parsed()) return cmd_rollout(rollout_args, rollout_policy);
    if (compare->parsed()) return cmd_compare(compare_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args, sweep_axis, sweep_policy);
    if (exp->parsed()) return cmd_export(export_input, export_format, export_out);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    fmt::print(stderr, "io error: {}\n", e.what());
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitIo;
  }
  return kExitConfig;
}
