#include "pebo_slam/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "pebo_slam/errors.hpp"

namespace pebo {

namespace {

using sim::Vec3d;

std::string where(const YAML::Node& node, const std::string& field) {
  const auto mark = node.Mark();
  if (mark.line < 0) return "field " + field;
  return "line " + std::to_string(mark.line + 1) + ", field " + field;
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& what) {
  throw ConfigError(where(node, field), what);
}

void reject_unknown_keys(const YAML::Node& map, const std::string& prefix,
                         const std::set<std::string>& allowed) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) {
      fail(kv.first, prefix + key, "unknown key");
    }
  }
}

double read_double(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail(node, field, "expected a number");
  }
}

Vec3d read_vec3(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence() || node.size() != 3) fail(node, field, "expected a list of 3 numbers");
  return {read_double(node[0], field), read_double(node[1], field), read_double(node[2], field)};
}

/// A rotation vector [rx, ry, rz] (rad) or a 3x3 matrix given as three rows.
Rotation3<double> read_rotation(const YAML::Node& node, const std::string& field) {
  if (node.IsSequence() && node.size() == 3 && node[0].IsSequence()) {
    Mat3<double> m;
    for (int r = 0; r < 3; ++r) m.row(r) = read_vec3(node[r], field).transpose();
    if (is_rotation(m, 1e-12)) return m;
    if (!is_rotation(m, 1e-6)) fail(node, field, "matrix is not a rotation (tolerance 1e-6)");
    return nearest_rotation(m);
  }
  return exp_so3(read_vec3(node, field));
}

/// Scalar (broadcast) or list of exactly n numbers.
std::vector<double> read_per_item(const YAML::Node& node, const std::string& field,
                                  std::size_t n) {
  if (node.IsScalar()) return std::vector<double>(n, read_double(node, field));
  if (!node.IsSequence() || node.size() != n) {
    fail(node, field, "expected a number or a list of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const auto& v : node) out.push_back(read_double(v, field));
  return out;
}

/// One 3-vector (broadcast) or a list of exactly n 3-vectors.
std::vector<Vec3d> read_per_item_vec3(const YAML::Node& node, const std::string& field,
                                      std::size_t n) {
  if (node.IsSequence() && node.size() == 3 && node[0].IsScalar()) {
    return std::vector<Vec3d>(n, read_vec3(node, field));
  }
  if (!node.IsSequence() || node.size() != n) {
    fail(node, field, "expected a 3-vector or a list of " + std::to_string(n) + " 3-vectors");
  }
  std::vector<Vec3d> out;
  for (const auto& v : node) out.push_back(read_vec3(v, field));
  return out;
}

void read_pose_block(const YAML::Node& node, const std::string& prefix, Rotation3<double>& rot,
                     Vec3d& pos) {
  if (!node.IsMap()) fail(node, prefix, "expected a mapping");
  reject_unknown_keys(node, prefix + ".", {"attitude", "position"});
  if (node["attitude"]) rot = read_rotation(node["attitude"], prefix + ".attitude");
  if (node["position"]) pos = read_vec3(node["position"], prefix + ".position");
}

bool on_grid(double t, double dt) {
  const double k = t / dt;
  return std::abs(k - std::round(k)) <= 1e-6;
}

void require_positive(const std::vector<double>& v, const std::string& field) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw ConfigError("field " + field + "[" + std::to_string(i) + "]", "must be positive");
    }
  }
}

void require_size(const std::vector<double>& v, std::size_t n, const std::string& field) {
  if (v.size() != n) {
    throw ConfigError("field " + field,
                      "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  }
}

template <typename T>
void fill_if_empty(std::vector<T>& v, std::size_t n, const T& value) {
  if (v.empty()) v.assign(n, value);
}

}  // namespace

std::size_t Scenario::step_count() const {
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

void apply_defaults(Scenario& s) {
  const std::size_t n = s.landmarks.size();
  const std::size_t nl = s.n_localization;
  fill_if_empty(s.gains.alpha, n, 5.0);
  fill_if_empty(s.gains.gamma, n, 100.0);
  fill_if_empty(s.gains.k_i, n, 20.0);
  fill_if_empty(s.gains.rho, nl, 1.0);
  fill_if_empty(s.gains.k_att, nl > 0 ? nl - 1 : 0, 1.0);
  fill_if_empty(s.gains.sigma, nl, 1.0);
  fill_if_empty(s.init.chi0, n, Vec3d(Vec3d::Zero()));
  fill_if_empty(s.init.zv_hat0, n, Vec3d(Vec3d::Zero()));
  fill_if_empty(s.baseline.zb_hat0, n, Vec3d(Vec3d::Zero()));
}

void validate(const Scenario& s) {
  if (s.schema_version != kScenarioSchemaVersion) {
    throw ConfigError("field schema_version",
                      "unsupported version " + std::to_string(s.schema_version));
  }
  if (!(s.dt > 0.0) || s.dt > 0.01) throw ConfigError("field dt", "must be in (0, 0.01]");
  if (!(s.t_final >= 0.0) || !std::isfinite(s.t_final)) {
    throw ConfigError("field t_final", "must be a finite non-negative number");
  }
  if (!on_grid(s.t_final, s.dt)) throw ConfigError("field t_final", "must be a multiple of dt");
  if (!is_rotation(s.initial_pose.rot) || !is_rotation(s.extension_q0) ||
      !is_rotation(s.init.qc_hat0)) {
    throw ConfigError("field attitude", "not a rotation");
  }
  try {
    sim::TrajectoryProfile profile(s.segments);
    if (profile.end_time() < s.t_final - 1e-9) {
      throw ConfigError("field trajectory", "profile ends before t_final");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("field trajectory", e.what());
  }
  for (std::size_t i = 0; i < s.segments.size(); ++i) {
    if (!on_grid(s.segments[i].t_end, s.dt)) {
      throw ConfigError("field trajectory[" + std::to_string(i) + "].t_end",
                        "segment boundaries must lie on the dt grid");
    }
  }
  try {
    sim::LandmarkField field(s.landmarks, s.n_localization);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("field landmarks", e.what());
  }
  const std::size_t n = s.landmarks.size();
  const std::size_t nl = s.n_localization;
  require_size(s.gains.alpha, n, "observer.alpha");
  require_size(s.gains.gamma, n, "observer.gamma");
  require_size(s.gains.k_i, n, "observer.k_i");
  require_size(s.gains.rho, nl, "observer.rho");
  require_size(s.gains.k_att, nl - 1, "observer.k_att");
  require_size(s.gains.sigma, nl, "observer.sigma");
  require_positive(s.gains.alpha, "observer.alpha");
  require_positive(s.gains.gamma, "observer.gamma");
  require_positive(s.gains.k_i, "observer.k_i");
  require_positive(s.gains.rho, "observer.rho");
  require_positive(s.gains.k_att, "observer.k_att");
  require_positive(s.gains.sigma, "observer.sigma");
  require_positive({s.gains.t_star}, "observer.t_star");
  if (s.init.chi0.size() != n || s.init.zv_hat0.size() != n || s.baseline.zb_hat0.size() != n) {
    throw ConfigError("field observer", "per-landmark initial values do not match landmark count");
  }
  require_positive({s.baseline.q_proc, s.baseline.r_meas, s.baseline.p0}, "baseline");
  if (s.noise.omega_amplitude < 0.0 || s.noise.vel_amplitude < 0.0 ||
      s.noise.bearing_amplitude < 0.0) {
    throw ConfigError("field noise", "amplitudes must be non-negative");
  }
  if (s.output.decimate < 1) throw ConfigError("field output.decimate", "must be >= 1");
}

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1), e.msg);
  }
  if (!root.IsMap()) throw ConfigError("", "scenario must be a mapping");
  reject_unknown_keys(root, "",
                      {"schema_version", "name", "dt", "t_final", "robot", "extension",
                       "trajectory", "landmarks", "noise", "observer", "baseline", "output",
                       "diagnostics"});

  Scenario s;
  if (!root["schema_version"]) throw ConfigError("", "missing schema_version");
  try {
    s.schema_version = root["schema_version"].as<int>();
  } catch (const YAML::Exception&) {
    fail(root["schema_version"], "schema_version", "expected an integer");
  }
  if (s.schema_version != kScenarioSchemaVersion) {
    fail(root["schema_version"], "schema_version",
         "unsupported version " + std::to_string(s.schema_version));
  }
  if (root["name"]) s.name = root["name"].as<std::string>();
  if (root["dt"]) s.dt = read_double(root["dt"], "dt");
  if (root["t_final"]) s.t_final = read_double(root["t_final"], "t_final");
  if (root["robot"]) read_pose_block(root["robot"], "robot", s.initial_pose.rot, s.initial_pose.pos);
  if (root["extension"]) {
    read_pose_block(root["extension"], "extension", s.extension_q0, s.extension_xi0);
  }

  const auto traj = root["trajectory"];
  if (!traj || !traj.IsSequence()) fail(root, "trajectory", "expected a list of segments");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto seg = traj[i];
    const std::string f = "trajectory[" + std::to_string(i) + "]";
    if (!seg.IsMap()) fail(seg, f, "expected a mapping");
    reject_unknown_keys(seg, f + ".", {"t_start", "t_end", "omega", "vel"});
    if (!seg["t_start"] || !seg["t_end"]) fail(seg, f, "t_start and t_end are required");
    sim::Segment out;
    out.t_start = read_double(seg["t_start"], f + ".t_start");
    out.t_end = read_double(seg["t_end"], f + ".t_end");
    if (seg["omega"]) out.twist.omega = read_vec3(seg["omega"], f + ".omega");
    if (seg["vel"]) out.twist.vel = read_vec3(seg["vel"], f + ".vel");
    s.segments.push_back(out);
  }

  const auto lm = root["landmarks"];
  if (!lm || !lm.IsMap()) fail(root, "landmarks", "expected a mapping");
  reject_unknown_keys(lm, "landmarks.", {"n_localization", "positions"});
  if (lm["n_localization"]) s.n_localization = lm["n_localization"].as<std::size_t>();
  if (!lm["positions"] || !lm["positions"].IsSequence()) {
    fail(lm, "landmarks.positions", "expected a list of 3-vectors");
  }
  for (const auto& p : lm["positions"]) s.landmarks.push_back(read_vec3(p, "landmarks.positions"));
  const std::size_t n = s.landmarks.size();
  const std::size_t nl = s.n_localization;
  if (nl < 3 || nl > n) {
    fail(lm, "landmarks.n_localization", "must satisfy 3 <= n_localization <= landmark count");
  }

  if (const auto nz = root["noise"]) {
    reject_unknown_keys(nz, "noise.",
                        {"enabled", "seed", "omega_amplitude", "vel_amplitude",
                         "bearing_amplitude"});
    if (nz["enabled"]) s.noise.enabled = nz["enabled"].as<bool>();
    if (nz["seed"]) s.noise.seed = nz["seed"].as<std::uint64_t>();
    if (nz["omega_amplitude"]) {
      s.noise.omega_amplitude = read_double(nz["omega_amplitude"], "noise.omega_amplitude");
    }
    if (nz["vel_amplitude"]) {
      s.noise.vel_amplitude = read_double(nz["vel_amplitude"], "noise.vel_amplitude");
    }
    if (nz["bearing_amplitude"]) {
      s.noise.bearing_amplitude = read_double(nz["bearing_amplitude"], "noise.bearing_amplitude");
    }
  }

  if (const auto ob = root["observer"]) {
    reject_unknown_keys(ob, "observer.",
                        {"alpha", "gamma", "k_i", "rho", "k_att", "sigma", "t_star", "chi0",
                         "zv_hat0", "qc_hat0", "x_hat0"});
    if (ob["alpha"]) s.gains.alpha = read_per_item(ob["alpha"], "observer.alpha", n);
    if (ob["gamma"]) s.gains.gamma = read_per_item(ob["gamma"], "observer.gamma", n);
    if (ob["k_i"]) s.gains.k_i = read_per_item(ob["k_i"], "observer.k_i", n);
    if (ob["rho"]) s.gains.rho = read_per_item(ob["rho"], "observer.rho", nl);
    if (ob["k_att"]) s.gains.k_att = read_per_item(ob["k_att"], "observer.k_att", nl - 1);
    if (ob["sigma"]) s.gains.sigma = read_per_item(ob["sigma"], "observer.sigma", nl);
    if (ob["t_star"]) s.gains.t_star = read_double(ob["t_star"], "observer.t_star");
    if (ob["chi0"]) s.init.chi0 = read_per_item_vec3(ob["chi0"], "observer.chi0", n);
    if (ob["zv_hat0"]) s.init.zv_hat0 = read_per_item_vec3(ob["zv_hat0"], "observer.zv_hat0", n);
    if (ob["qc_hat0"]) s.init.qc_hat0 = read_rotation(ob["qc_hat0"], "observer.qc_hat0");
    if (ob["x_hat0"]) s.init.x_hat0 = read_vec3(ob["x_hat0"], "observer.x_hat0");
  }

  if (const auto bl = root["baseline"]) {
    reject_unknown_keys(bl, "baseline.", {"q_proc", "r_meas", "p0", "zb_hat0"});
    if (bl["q_proc"]) s.baseline.q_proc = read_double(bl["q_proc"], "baseline.q_proc");
    if (bl["r_meas"]) s.baseline.r_meas = read_double(bl["r_meas"], "baseline.r_meas");
    if (bl["p0"]) s.baseline.p0 = read_double(bl["p0"], "baseline.p0");
    if (bl["zb_hat0"]) s.baseline.zb_hat0 = read_per_item_vec3(bl["zb_hat0"], "baseline.zb_hat0", n);
  }

  if (const auto out = root["output"]) {
    reject_unknown_keys(out, "output.", {"dir", "decimate"});
    if (out["dir"]) s.output.dir = out["dir"].as<std::string>();
    if (out["decimate"]) s.output.decimate = out["decimate"].as<int>();
  }
  if (const auto diag = root["diagnostics"]) {
    reject_unknown_keys(diag, "diagnostics.", {"pure_integral"});
    if (diag["pure_integral"]) s.pure_integral_diagnostic = diag["pure_integral"].as<bool>();
  }

  apply_defaults(s);
  validate(s);
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::vector<std::string> builtin_scenario_names() {
  return {"paper-sec4", "wide-landmarks", "static"};
}

namespace {

Scenario paper_sec4_base() {
  constexpr double pi = std::numbers::pi;
  Scenario s;
  s.name = "paper-sec4";
  s.dt = 1e-3;
  s.t_final = 30.0;
  s.initial_pose.rot = rotz(pi / 6.0);
  s.initial_pose.pos = Vec3d(1.0, 1.0, 2.0);
  s.extension_q0 = rotz(pi / 2.0);
  s.extension_xi0 = Vec3d(0.0, 1.0, 1.0);
  s.segments = {
      sim::Segment{0.0, 12.0, sim::Twistd{Vec3d(0.0, 0.0, -0.4), Vec3d(1.0, 0.0, 0.0)}},
      sim::Segment{12.0, 30.0, sim::Twistd::zero()},
  };
  // Each landmark is passed at roughly 0.5 m, alternately above and below
  // the 2.5 m-radius arc, so every bearing sweeps quickly at some point
  // before the stop at 12 s.
  s.landmarks = {Vec3d(1.8, 1.3, 1.5),   Vec3d(3.45, 0.55, 2.3), Vec3d(5.1, -0.65, 1.7),
                 Vec3d(4.3, -2.6, 2.5),  Vec3d(2.6, -3.15, 1.8), Vec3d(0.65, -3.45, 2.4)};
  s.n_localization = 3;
  s.noise = sim::NoiseConfig{1, 0.01, 0.01, 0.01, false};
  s.gains.t_star = 12.0;
  return s;
}

}  // namespace

Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  if (name == "paper-sec4") {
    s = paper_sec4_base();
  } else if (name == "wide-landmarks") {
    s = paper_sec4_base();
    s.name = name;
    s.landmarks = {Vec3d(5, 0, 1),  Vec3d(4, 3, 2),   Vec3d(0, 5, 1.5),
                   Vec3d(-3, 4, 3), Vec3d(-5, -1, 2), Vec3d(2, -4, 1)};
  } else if (name == "static") {
    s = paper_sec4_base();
    s.name = name;
    s.segments = {sim::Segment{0.0, 30.0, sim::Twistd::zero()}};
  } else {
    throw ConfigError("", "unknown builtin scenario '" + name + "'");
  }
  apply_defaults(s);
  validate(s);
  return s;
}

Scenario resolve_scenario(const std::string& name_or_path) {
  for (const auto& n : builtin_scenario_names()) {
    if (n == name_or_path) return builtin_scenario(n);
  }
  return load_scenario_file(name_or_path);
}

namespace {

void emit_vec3(YAML::Emitter& out, const Vec3d& v) {
  out << YAML::Flow << YAML::BeginSeq << v(0) << v(1) << v(2) << YAML::EndSeq;
}

void emit_rotation(YAML::Emitter& out, const Rotation3<double>& r) {
  out << YAML::BeginSeq;
  for (int i = 0; i < 3; ++i) emit_vec3(out, r.row(i).transpose());
  out << YAML::EndSeq;
}

void emit_list(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << x;
  out << YAML::EndSeq;
}

void emit_vec3_list(YAML::Emitter& out, const std::vector<Vec3d>& v) {
  out << YAML::BeginSeq;
  for (const auto& x : v) emit_vec3(out, x);
  out << YAML::EndSeq;
}

}  // namespace

std::string to_yaml(const Scenario& s) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << s.schema_version;
  out << YAML::Key << "name" << YAML::Value << s.name;
  out << YAML::Key << "dt" << YAML::Value << s.dt;
  out << YAML::Key << "t_final" << YAML::Value << s.t_final;

  out << YAML::Key << "robot" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "attitude" << YAML::Value;
  emit_rotation(out, s.initial_pose.rot);
  out << YAML::Key << "position" << YAML::Value;
  emit_vec3(out, s.initial_pose.pos);
  out << YAML::EndMap;

  out << YAML::Key << "extension" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "attitude" << YAML::Value;
  emit_rotation(out, s.extension_q0);
  out << YAML::Key << "position" << YAML::Value;
  emit_vec3(out, s.extension_xi0);
  out << YAML::EndMap;

  out << YAML::Key << "trajectory" << YAML::Value << YAML::BeginSeq;
  for (const auto& seg : s.segments) {
    out << YAML::BeginMap;
    out << YAML::Key << "t_start" << YAML::Value << seg.t_start;
    out << YAML::Key << "t_end" << YAML::Value << seg.t_end;
    out << YAML::Key << "omega" << YAML::Value;
    emit_vec3(out, seg.twist.omega);
    out << YAML::Key << "vel" << YAML::Value;
    emit_vec3(out, seg.twist.vel);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "landmarks" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_localization" << YAML::Value << s.n_localization;
  out << YAML::Key << "positions" << YAML::Value;
  emit_vec3_list(out, s.landmarks);
  out << YAML::EndMap;

  out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "enabled" << YAML::Value << s.noise.enabled;
  out << YAML::Key << "seed" << YAML::Value << s.noise.seed;
  out << YAML::Key << "omega_amplitude" << YAML::Value << s.noise.omega_amplitude;
  out << YAML::Key << "vel_amplitude" << YAML::Value << s.noise.vel_amplitude;
  out << YAML::Key << "bearing_amplitude" << YAML::Value << s.noise.bearing_amplitude;
  out << YAML::EndMap;

  out << YAML::Key << "observer" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "alpha" << YAML::Value;
  emit_list(out, s.gains.alpha);
  out << YAML::Key << "gamma" << YAML::Value;
  emit_list(out, s.gains.gamma);
  out << YAML::Key << "k_i" << YAML::Value;
  emit_list(out, s.gains.k_i);
  out << YAML::Key << "rho" << YAML::Value;
  emit_list(out, s.gains.rho);
  out << YAML::Key << "k_att" << YAML::Value;
  emit_list(out, s.gains.k_att);
  out << YAML::Key << "sigma" << YAML::Value;
  emit_list(out, s.gains.sigma);
  out << YAML::Key << "t_star" << YAML::Value << s.gains.t_star;
  out << YAML::Key << "chi0" << YAML::Value;
  emit_vec3_list(out, s.init.chi0);
  out << YAML::Key << "zv_hat0" << YAML::Value;
  emit_vec3_list(out, s.init.zv_hat0);
  out << YAML::Key << "qc_hat0" << YAML::Value;
  emit_rotation(out, s.init.qc_hat0);
  out << YAML::Key << "x_hat0" << YAML::Value;
  emit_vec3(out, s.init.x_hat0);
  out << YAML::EndMap;

  out << YAML::Key << "baseline" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "q_proc" << YAML::Value << s.baseline.q_proc;
  out << YAML::Key << "r_meas" << YAML::Value << s.baseline.r_meas;
  out << YAML::Key << "p0" << YAML::Value << s.baseline.p0;
  out << YAML::Key << "zb_hat0" << YAML::Value;
  emit_vec3_list(out, s.baseline.zb_hat0);
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << s.output.dir.string();
  out << YAML::Key << "decimate" << YAML::Value << s.output.decimate;
  out << YAML::EndMap;

  out << YAML::Key << "diagnostics" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "pure_integral" << YAML::Value << s.pure_integral_diagnostic;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace pebo
