#include "mcplan/io.hpp"

#include <fstream>

namespace mcplan {

using nlohmann::json;

std::string format_number(double v) { return json(v).dump(); }

nlohmann::json trajectory_step_record(const Trajectory& traj, size_t k,
                                      const WorldConfig& world) {
  const ControlPair& u = traj.controls[k];
  const Pose2& z = traj.states[k];
  const EquilibriumResult& eq = traj.equilibria[k];
  const auto [c1, c2] = handle_contact_points(world.peg, z);
  const Vec2 f1 = world.stiffness.k_c * (u.u1 - c1);
  const Vec2 f2 = world.stiffness.k_c * (u.u2 - c2);

  json contacts = json::array();
  for (const ContactRecord& c : eq.contacts) {
    contacts.push_back({{"point", {c.point.x(), c.point.y()}},
                        {"normal", {c.normal.x(), c.normal.y()}},
                        {"penetration", c.penetration},
                        {"surface", surface_name(c.surface)},
                        {"hole", c.hole_index}});
  }
  return json{{"t", traj.times[k]},
              {"u", {u.u1.x(), u.u1.y(), u.u2.x(), u.u2.y()}},
              {"z", {z.x, z.y, z.theta}},
              {"f", {f1.x(), f1.y(), f2.x(), f2.y()}},
              {"cost",
               {{"friction", traj.cost_samples[k].friction},
                {"energy", traj.cost_samples[k].energy},
                {"stability", traj.cost_samples[k].stability}}},
              {"slip", traj.slip_flags[k] != 0},
              {"unstable", traj.instability_flags[k] != 0},
              {"converged", eq.converged},
              {"det_scaled", eq.det_scaled},
              {"contacts", contacts}};
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

constexpr const char* kCsvHeader =
    "t,u1x,u1y,u2x,u2y,zx,zy,ztheta,f1x,f1y,f2x,f2y,"
    "cost_friction,cost_energy,cost_stability,slip,unstable,converged,det_scaled";

}  // namespace

void write_trajectory_jsonl(const std::string& path, const Trajectory& traj,
                            const WorldConfig& world) {
  std::ofstream out = open_out(path);
  for (size_t k = 0; k < traj.size(); ++k) {
    out << trajectory_step_record(traj, k, world).dump() << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const WorldConfig& world) {
  std::ofstream out = open_out(path);
  out << kCsvHeader << '\n';
  for (size_t k = 0; k < traj.size(); ++k) {
    const json r = trajectory_step_record(traj, k, world);
    out << r["t"].dump();
    for (const auto& v : r["u"]) out << ',' << v.dump();
    for (const auto& v : r["z"]) out << ',' << v.dump();
    for (const auto& v : r["f"]) out << ',' << v.dump();
    out << ',' << r["cost"]["friction"].dump() << ',' << r["cost"]["energy"].dump() << ','
        << r["cost"]["stability"].dump();
    out << ',' << (r["slip"].get<bool>() ? 1 : 0) << ',' << (r["unstable"].get<bool>() ? 1 : 0)
        << ',' << (r["converged"].get<bool>() ? 1 : 0) << ',' << r["det_scaled"].dump() << '\n';
  }
}

void export_jsonl_to_csv(const std::string& jsonl_path, const std::string& csv_path) {
  std::ifstream in(jsonl_path);
  if (!in) throw IoError("cannot open trajectory file: " + jsonl_path);
  std::ofstream out = open_out(csv_path);
  out << kCsvHeader << '\n';
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json r;
    try {
      r = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError(std::string("corrupt trajectory record: ") + e.what());
    }
    out << r.at("t").dump();
    for (const auto& v : r.at("u")) out << ',' << v.dump();
    for (const auto& v : r.at("z")) out << ',' << v.dump();
    for (const auto& v : r.at("f")) out << ',' << v.dump();
    out << ',' << r.at("cost").at("friction").dump() << ',' << r.at("cost").at("energy").dump()
        << ',' << r.at("cost").at("stability").dump();
    out << ',' << (r.at("slip").get<bool>() ? 1 : 0) << ','
        << (r.at("unstable").get<bool>() ? 1 : 0) << ','
        << (r.at("converged").get<bool>() ? 1 : 0) << ',' << r.at("det_scaled").dump() << '\n';
  }
}

nlohmann::json policy_to_json(const DmpParams& params) {
  std::vector<double> theta;
  theta.reserve(params.theta.size());
  for (Eigen::Index i = 0; i < params.theta.rows(); ++i) {
    for (Eigen::Index j = 0; j < params.theta.cols(); ++j) theta.push_back(params.theta(i, j));
  }
  return json{{"dof_count", kControlDof},
              {"basis_count", params.basis_count},
              {"duration", params.duration},
              {"alpha_u", params.alpha_u},
              {"beta_u", params.beta_u},
              {"alpha_x", params.alpha_x},
              {"u0", {params.u0(0), params.u0(1), params.u0(2), params.u0(3)}},
              {"uT", {params.uT(0), params.uT(1), params.uT(2), params.uT(3)}},
              {"theta", theta}};
}

DmpParams policy_from_json(const nlohmann::json& j) {
  DmpParams p;
  try {
    if (j.at("dof_count").get<int>() != kControlDof) {
      throw IoError("policy file: unsupported dof count");
    }
    p.basis_count = j.at("basis_count").get<int>();
    p.duration = j.at("duration").get<double>();
    p.alpha_u = j.at("alpha_u").get<double>();
    p.beta_u = j.at("beta_u").get<double>();
    p.alpha_x = j.at("alpha_x").get<double>();
    const auto u0 = j.at("u0").get<std::vector<double>>();
    const auto uT = j.at("uT").get<std::vector<double>>();
    const auto theta = j.at("theta").get<std::vector<double>>();
    if (u0.size() != 4 || uT.size() != 4 ||
        theta.size() != static_cast<size_t>(kControlDof * p.basis_count)) {
      throw IoError("policy file: inconsistent array sizes");
    }
    for (int i = 0; i < 4; ++i) {
      p.u0(i) = u0[i];
      p.uT(i) = uT[i];
    }
    p.theta.resize(kControlDof, p.basis_count);
    for (int i = 0; i < kControlDof; ++i) {
      for (int k = 0; k < p.basis_count; ++k) p.theta(i, k) = theta[i * p.basis_count + k];
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("corrupt policy file: ") + e.what());
  }
  p.validate();
  return p;
}

void write_policy(const std::string& path, const DmpParams& params) {
  std::ofstream out = open_out(path);
  out << policy_to_json(params).dump(2) << '\n';
}

DmpParams read_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open policy file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(std::string("corrupt policy file: ") + e.what());
  }
  return policy_from_json(j);
}

void write_training_log(const std::string& path,
                        const std::vector<IterationRecord>& history) {
  std::ofstream out = open_out(path);
  for (const IterationRecord& r : history) {
    const json rec{{"iteration", r.iteration},
                   {"best_cost", r.best_cost},
                   {"mean_cost", r.mean_cost},
                   {"exploration_sigma", r.exploration_sigma},
                   {"best_breakdown",
                    {{"kinematic", r.best_breakdown.kinematic},
                     {"friction", r.best_breakdown.friction},
                     {"energy", r.best_breakdown.energy},
                     {"stability", r.best_breakdown.stability},
                     {"regularization", r.best_breakdown.regularization},
                     {"total", r.best_breakdown.total}}}};
    out << rec.dump() << '\n';
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace mcplan
