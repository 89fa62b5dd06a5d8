#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mcplan/config.hpp"
#include "mcplan/experiments.hpp"
#include "mcplan/io.hpp"

using namespace mcplan;
using nlohmann::json;

namespace {

ExperimentConfig sample_config() {
  ExperimentConfig cfg;
  cfg.world.peg.half_width = 0.0045;
  cfg.world.peg.half_height = 0.006;
  HoleEntry h;
  h.width = 0.0095;
  h.depth = 0.008;
  h.chamfer_width = 0.0025;
  cfg.world.hole.holes = {h};
  cfg.world.contact_spacing = 2e-4;
  cfg.dmp.steps = 30;
  cfg.bbo.max_iterations = 3;
  cfg.scenario_count = 2;
  cfg.world.finalize();
  return cfg;
}

std::string temp_path(const std::string& name) {
  return std::string("/tmp/mcplan_test_") + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config round trip is the identity") {
  const ExperimentConfig cfg = sample_config();
  const json j1 = config_to_json(cfg);
  const ExperimentConfig reparsed = config_from_json(j1);
  const json j2 = config_to_json(reparsed);
  CHECK(j1 == j2);
  CHECK(j1.dump() == j2.dump());
}

TEST_CASE("unknown keys are rejected with their path") {
  json j = config_to_json(sample_config());
  j["world"]["peg"]["half_depth"] = 1.0;
  try {
    config_from_json(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("world.peg.half_depth") != std::string::npos);
  }
}

TEST_CASE("invalid values name the offending key") {
  json j = config_to_json(sample_config());
  j["world"]["hole"]["holes"][0]["chamfer_width"] = -0.001;
  try {
    config_from_json(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("chamfer_width") != std::string::npos);
  }
  j = config_to_json(sample_config());
  j["bbo"]["strategy"] = "genetic";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = config_to_json(sample_config());
  j["dmp"]["steps"] = 0;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("dotted-path overrides") {
  json j = config_to_json(sample_config());
  apply_override(j, "world.friction.handle=0.05");
  apply_override(j, "bbo.strategy=reward_weighted");  // bare string value
  apply_override(j, "scenario.include_nominal=false");
  const ExperimentConfig cfg = config_from_json(j);
  CHECK(cfg.world.mu_handle == 0.05);
  CHECK(cfg.bbo.strategy == UpdateStrategy::RewardWeighted);
  CHECK_FALSE(cfg.scenario.include_nominal);
  CHECK_THROWS_AS(apply_override(j, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "=5"), ConfigError);
}

TEST_CASE("load_config reports missing files") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("policy file round trip is exact") {
  const ExperimentConfig cfg = sample_config();
  Eigen::MatrixXd theta(kControlDof, cfg.dmp.basis_count);
  for (int i = 0; i < theta.rows(); ++i) {
    for (int k = 0; k < theta.cols(); ++k) theta(i, k) = std::sin(i * 10.0 + k) * 17.3;
  }
  const DmpParams p = make_dmp(cfg, theta);
  const std::string path = temp_path("policy.json");
  write_policy(path, p);
  const DmpParams q = read_policy(path);
  CHECK((p.theta - q.theta).norm() == 0.0);
  CHECK((p.u0 - q.u0).norm() == 0.0);
  CHECK((p.uT - q.uT).norm() == 0.0);
  CHECK(p.duration == q.duration);
  CHECK(p.alpha_u == q.alpha_u);
  std::remove(path.c_str());

  CHECK_THROWS_AS(read_policy("/nonexistent/policy.json"), IoError);
  std::ofstream(temp_path("corrupt.json")) << "{ not json";
  CHECK_THROWS_AS(read_policy(temp_path("corrupt.json")), IoError);
  std::remove(temp_path("corrupt.json").c_str());
}

TEST_CASE("trajectory export preserves every numeric field") {
  const ExperimentConfig cfg = sample_config();
  const DmpParams p = make_dmp(cfg, Eigen::MatrixXd::Zero(kControlDof, cfg.dmp.basis_count));
  const RolloutReport rep = run_policy(cfg, p, cfg.world);

  const std::string jsonl = temp_path("traj.jsonl");
  const std::string csv_direct = temp_path("traj_direct.csv");
  const std::string csv_export = temp_path("traj_export.csv");
  write_trajectory_jsonl(jsonl, rep.trajectory, cfg.world);
  write_trajectory_csv(csv_direct, rep.trajectory, cfg.world);
  export_jsonl_to_csv(jsonl, csv_export);
  CHECK(slurp(csv_direct) == slurp(csv_export));  // lossless re-encoding

  // the force columns satisfy f_i = k_c (u_i - c_i), recomputable from pose
  std::ifstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    const json r = json::parse(line);
    const Pose2 z{r["z"][0], r["z"][1], r["z"][2]};
    const auto [c1, c2] = handle_contact_points(cfg.world.peg, z);
    const double k_c = cfg.world.stiffness.k_c;
    CHECK(std::abs(double(r["f"][0]) - k_c * (double(r["u"][0]) - c1.x())) < 1e-9);
    CHECK(std::abs(double(r["f"][1]) - k_c * (double(r["u"][1]) - c1.y())) < 1e-9);
    CHECK(std::abs(double(r["f"][2]) - k_c * (double(r["u"][2]) - c2.x())) < 1e-9);
    CHECK(std::abs(double(r["f"][3]) - k_c * (double(r["u"][3]) - c2.y())) < 1e-9);
  }
  std::remove(jsonl.c_str());
  std::remove(csv_direct.c_str());
  std::remove(csv_export.c_str());
}

TEST_CASE("empty trajectory exports a header-only csv") {
  const std::string jsonl = temp_path("empty.jsonl");
  const std::string csv = temp_path("empty.csv");
  std::ofstream(jsonl).flush();
  export_jsonl_to_csv(jsonl, csv);
  const std::string content = slurp(csv);
  CHECK(content.find("t,u1x") == 0);
  CHECK(std::count(content.begin(), content.end(), '\n') == 1);
  std::remove(jsonl.c_str());
  std::remove(csv.c_str());
}

TEST_CASE("number formatting survives a parse round trip") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 3.141592653589793}) {
    CHECK(json::parse(format_number(v)).get<double>() == v);
  }
}
