#include "mcplan/config.hpp"

#include <fstream>
#include <set>

namespace mcplan {

namespace {

using nlohmann::json;

/// Strict object reader: every key must be consumed, leftovers are errors.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    return j_.contains(key);
  }

  const json* take(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  template <typename T>
  void get(const std::string& key, T* out) {
    const json* v = take(key);
    if (!v) return;
    try {
      *out = v->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": invalid value type");
    }
  }

  void get_positive(const std::string& key, double* out) {
    get(key, out);
    if (!(*out > 0.0)) throw ConfigError(path_ + "." + key + ": must be positive");
  }

  void get_nonnegative(const std::string& key, double* out) {
    get(key, out);
    if (*out < 0.0) throw ConfigError(path_ + "." + key + ": must be >= 0");
  }

  Reader child(const std::string& key) {
    const json* v = take(key);
    return Reader(v ? *v : json::object(), path_ + "." + key);
  }

  bool has_child(const std::string& key) const { return j_.contains(key); }

  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError(path_ + "." + it.key() + ": unknown key");
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  json j_;
  std::string path_;
  std::set<std::string> seen_;
};

Pose2 parse_pose(Reader r) {
  Pose2 p;
  r.get("x", &p.x);
  r.get("y", &p.y);
  r.get("theta", &p.theta);
  r.finish();
  return p;
}

json pose_to_json(const Pose2& p) {
  return json{{"x", p.x}, {"y", p.y}, {"theta", p.theta}};
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  Reader root(j, "config");
  root.get("schema_version", &cfg.schema_version);
  if (cfg.schema_version != 1) throw ConfigError("config.schema_version: unsupported version");

  if (root.has_child("world")) {
    Reader w = root.child("world");
    if (w.has_child("peg")) {
      Reader p = w.child("peg");
      p.get_positive("half_width", &cfg.world.peg.half_width);
      p.get_positive("half_height", &cfg.world.peg.half_height);
      if (const json* prongs = p.take("prongs")) {
        if (!prongs->is_array()) throw ConfigError("config.world.peg.prongs: expected array");
        cfg.world.peg.prongs.clear();
        for (size_t i = 0; i < prongs->size(); ++i) {
          Reader pr((*prongs)[i], "config.world.peg.prongs[" + std::to_string(i) + "]");
          Prong prong;
          pr.get("offset", &prong.offset);
          pr.get_positive("width", &prong.width);
          pr.get_positive("length", &prong.length);
          pr.finish();
          cfg.world.peg.prongs.push_back(prong);
        }
      }
      p.finish();
    }
    if (w.has_child("hole")) {
      Reader h = w.child("hole");
      if (h.has_child("pose")) cfg.world.hole.mouth_center = parse_pose(h.child("pose"));
      if (const json* holes = h.take("holes")) {
        if (!holes->is_array() || holes->empty()) {
          throw ConfigError("config.world.hole.holes: expected non-empty array");
        }
        cfg.world.hole.holes.clear();
        for (size_t i = 0; i < holes->size(); ++i) {
          Reader he((*holes)[i], "config.world.hole.holes[" + std::to_string(i) + "]");
          HoleEntry entry;
          he.get("offset", &entry.offset);
          he.get_positive("width", &entry.width);
          he.get_positive("depth", &entry.depth);
          he.get_nonnegative("chamfer_width", &entry.chamfer_width);
          he.get("chamfer_angle", &entry.chamfer_angle);
          if (!(entry.chamfer_angle > 0.0) || !(entry.chamfer_angle < M_PI / 2.0)) {
            throw ConfigError(he.path() + ".chamfer_angle: must lie in (0, pi/2)");
          }
          he.finish();
          cfg.world.hole.holes.push_back(entry);
        }
      }
      h.finish();
    }
    if (w.has_child("stiffness")) {
      Reader s = w.child("stiffness");
      s.get_positive("k_c", &cfg.world.stiffness.k_c);
      s.get_positive("k_pen", &cfg.world.stiffness.k_pen);
      s.get_positive("k_t", &cfg.world.stiffness.k_t);
      s.get_positive("k_r", &cfg.world.stiffness.k_r);
      s.finish();
    }
    if (w.has_child("friction")) {
      Reader f = w.child("friction");
      f.get_positive("handle", &cfg.world.mu_handle);
      f.get_positive("environment", &cfg.world.mu_env);
      f.finish();
    }
    w.get_positive("contact_spacing", &cfg.world.contact_spacing);
    if (w.has_child("solver")) {
      Reader s = w.child("solver");
      s.get_positive("tolerance", &cfg.world.solver.tolerance);
      s.get("max_iterations", &cfg.world.solver.max_iterations);
      s.get_positive("rot_norm_scale", &cfg.world.solver.rot_norm_scale);
      s.finish();
    }
    w.finish();
  }

  if (root.has_child("weights")) {
    Reader w = root.child("weights");
    w.get_nonnegative("alpha1", &cfg.weights.alpha1);
    w.get_nonnegative("alpha2", &cfg.weights.alpha2);
    w.get_nonnegative("alpha3", &cfg.weights.alpha3);
    w.get_nonnegative("alpha4", &cfg.weights.alpha4);
    w.get_nonnegative("alpha5", &cfg.weights.alpha5);
    w.get_positive("d0", &cfg.weights.d0);
    w.get_positive("l0", &cfg.weights.l0);
    w.get_positive("sigma_rot_scale", &cfg.weights.sigma_rot_scale);
    w.finish();
  }

  if (root.has_child("dmp")) {
    Reader d = root.child("dmp");
    d.get("basis_count", &cfg.dmp.basis_count);
    if (cfg.dmp.basis_count < 2) throw ConfigError("config.dmp.basis_count: must be >= 2");
    d.get_positive("duration", &cfg.dmp.duration);
    d.get_positive("alpha_u", &cfg.dmp.alpha_u);
    d.get_positive("alpha_x", &cfg.dmp.alpha_x);
    d.get("steps", &cfg.dmp.steps);
    if (cfg.dmp.steps < 1) throw ConfigError("config.dmp.steps: must be >= 1");
    d.finish();
  }

  if (root.has_child("bbo")) {
    Reader b = root.child("bbo");
    b.get("candidates", &cfg.bbo.candidate_count);
    if (cfg.bbo.candidate_count < 2) throw ConfigError("config.bbo.candidates: must be >= 2");
    b.get("scenarios", &cfg.scenario_count);
    if (cfg.scenario_count < 1) throw ConfigError("config.bbo.scenarios: must be >= 1");
    b.get("max_iterations", &cfg.bbo.max_iterations);
    std::string strategy = cfg.bbo.strategy == UpdateStrategy::Elite ? "elite" : "reward_weighted";
    b.get("strategy", &strategy);
    if (strategy == "elite") {
      cfg.bbo.strategy = UpdateStrategy::Elite;
    } else if (strategy == "reward_weighted") {
      cfg.bbo.strategy = UpdateStrategy::RewardWeighted;
    } else {
      throw ConfigError("config.bbo.strategy: must be 'elite' or 'reward_weighted'");
    }
    b.get("seed", &cfg.bbo.seed);
    b.get_positive("init_sigma", &cfg.bbo.init_sigma);
    b.get_positive("sigma_decay", &cfg.bbo.sigma_decay);
    b.get_positive("reward_shape", &cfg.bbo.reward_shape);
    b.get_positive("cost_cap", &cfg.bbo.cost_cap);
    b.get_positive("convergence_tol", &cfg.bbo.convergence_tol);
    b.get("convergence_window", &cfg.bbo.convergence_window);
    b.finish();
  }

  if (root.has_child("scenario")) {
    Reader s = root.child("scenario");
    s.get_nonnegative("sigma_x", &cfg.scenario.sigma_x);
    s.get_nonnegative("sigma_y", &cfg.scenario.sigma_y);
    s.get_nonnegative("sigma_theta", &cfg.scenario.sigma_theta);
    s.get("include_nominal", &cfg.scenario.include_nominal);
    std::string weighting =
        cfg.scenario.weighting == ScenarioWeighting::Uniform ? "uniform" : "density";
    s.get("weighting", &weighting);
    if (weighting == "uniform") {
      cfg.scenario.weighting = ScenarioWeighting::Uniform;
    } else if (weighting == "density") {
      cfg.scenario.weighting = ScenarioWeighting::DensityProportional;
    } else {
      throw ConfigError("config.scenario.weighting: must be 'uniform' or 'density'");
    }
    s.finish();
  }

  if (root.has_child("success")) {
    Reader s = root.child("success");
    s.get_positive("depth_fraction", &cfg.success.depth_fraction);
    double tilt_deg = cfg.success.tilt_rad * 180.0 / M_PI;
    s.get_positive("tilt_deg", &tilt_deg);
    cfg.success.tilt_rad = tilt_deg * M_PI / 180.0;
    s.get("clean_tail_steps", &cfg.success.clean_tail_steps);
    s.finish();
  }

  if (root.has_child("start")) {
    Reader s = root.child("start");
    if (s.has_child("z0")) cfg.start.z0 = parse_pose(s.child("z0"));
    s.get_positive("squeeze", &cfg.start.squeeze);
    s.finish();
  }

  if (root.has_child("task")) {
    Reader t = root.child("task");
    t.get_nonnegative("insertion_press", &cfg.task.insertion_press);
    t.finish();
  }

  if (root.has_child("study")) {
    Reader s = root.child("study");
    if (const json* ratios = s.take("chamfer_ratios")) {
      if (!ratios->is_array() || ratios->empty()) {
        throw ConfigError("config.study.chamfer_ratios: expected non-empty array");
      }
      cfg.study.chamfer_ratios = ratios->get<std::vector<double>>();
      for (double r : cfg.study.chamfer_ratios) {
        if (!(r > 0.0)) throw ConfigError("config.study.chamfer_ratios: ratios must be positive");
      }
    }
    s.get("eval_draws", &cfg.study.eval_draws);
    if (cfg.study.eval_draws < 1) throw ConfigError("config.study.eval_draws: must be >= 1");
    s.get("eval_seed", &cfg.study.eval_seed);
    s.finish();
  }

  root.get("output_dir", &cfg.output_dir);
  root.finish();

  cfg.world.finalize();  // validates shapes and caches boundary samples
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  json prongs = json::array();
  for (const Prong& p : cfg.world.peg.prongs) {
    prongs.push_back({{"offset", p.offset}, {"width", p.width}, {"length", p.length}});
  }
  json holes = json::array();
  for (const HoleEntry& h : cfg.world.hole.holes) {
    holes.push_back({{"offset", h.offset},
                     {"width", h.width},
                     {"depth", h.depth},
                     {"chamfer_width", h.chamfer_width},
                     {"chamfer_angle", h.chamfer_angle}});
  }
  return json{
      {"schema_version", cfg.schema_version},
      {"world",
       {{"peg",
         {{"half_width", cfg.world.peg.half_width},
          {"half_height", cfg.world.peg.half_height},
          {"prongs", prongs}}},
        {"hole", {{"pose", pose_to_json(cfg.world.hole.mouth_center)}, {"holes", holes}}},
        {"stiffness",
         {{"k_c", cfg.world.stiffness.k_c},
          {"k_pen", cfg.world.stiffness.k_pen},
          {"k_t", cfg.world.stiffness.k_t},
          {"k_r", cfg.world.stiffness.k_r}}},
        {"friction", {{"handle", cfg.world.mu_handle}, {"environment", cfg.world.mu_env}}},
        {"contact_spacing", cfg.world.contact_spacing},
        {"solver",
         {{"tolerance", cfg.world.solver.tolerance},
          {"max_iterations", cfg.world.solver.max_iterations},
          {"rot_norm_scale", cfg.world.solver.rot_norm_scale}}}}},
      {"weights",
       {{"alpha1", cfg.weights.alpha1},
        {"alpha2", cfg.weights.alpha2},
        {"alpha3", cfg.weights.alpha3},
        {"alpha4", cfg.weights.alpha4},
        {"alpha5", cfg.weights.alpha5},
        {"d0", cfg.weights.d0},
        {"l0", cfg.weights.l0},
        {"sigma_rot_scale", cfg.weights.sigma_rot_scale}}},
      {"dmp",
       {{"basis_count", cfg.dmp.basis_count},
        {"duration", cfg.dmp.duration},
        {"alpha_u", cfg.dmp.alpha_u},
        {"alpha_x", cfg.dmp.alpha_x},
        {"steps", cfg.dmp.steps}}},
      {"bbo",
       {{"candidates", cfg.bbo.candidate_count},
        {"scenarios", cfg.scenario_count},
        {"max_iterations", cfg.bbo.max_iterations},
        {"strategy", cfg.bbo.strategy == UpdateStrategy::Elite ? "elite" : "reward_weighted"},
        {"seed", cfg.bbo.seed},
        {"init_sigma", cfg.bbo.init_sigma},
        {"sigma_decay", cfg.bbo.sigma_decay},
        {"reward_shape", cfg.bbo.reward_shape},
        {"cost_cap", cfg.bbo.cost_cap},
        {"convergence_tol", cfg.bbo.convergence_tol},
        {"convergence_window", cfg.bbo.convergence_window}}},
      {"scenario",
       {{"sigma_x", cfg.scenario.sigma_x},
        {"sigma_y", cfg.scenario.sigma_y},
        {"sigma_theta", cfg.scenario.sigma_theta},
        {"include_nominal", cfg.scenario.include_nominal},
        {"weighting",
         cfg.scenario.weighting == ScenarioWeighting::Uniform ? "uniform" : "density"}}},
      {"success",
       {{"depth_fraction", cfg.success.depth_fraction},
        {"tilt_deg", cfg.success.tilt_rad * 180.0 / M_PI},
        {"clean_tail_steps", cfg.success.clean_tail_steps}}},
      {"start", {{"z0", pose_to_json(cfg.start.z0)}, {"squeeze", cfg.start.squeeze}}},
      {"task", {{"insertion_press", cfg.task.insertion_press}}},
      {"study",
       {{"chamfer_ratios", cfg.study.chamfer_ratios},
        {"eval_draws", cfg.study.eval_draws},
        {"eval_seed", cfg.study.eval_seed}}},
      {"output_dir", cfg.output_dir},
  };
}

void apply_override(nlohmann::json& j, const std::string& key_value) {
  const size_t eq = key_value.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must be KEY=VALUE: " + key_value);
  }
  const std::string key = key_value.substr(0, eq);
  const std::string raw = key_value.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // bare strings are allowed unquoted
  }
  json* node = &j;
  size_t pos = 0;
  while (true) {
    const size_t dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (part.empty()) throw ConfigError("override has an empty path segment: " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    pos = dot + 1;
  }
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  for (const std::string& ov : overrides) apply_override(j, ov);
  return config_from_json(j);
}

}  // namespace mcplan
