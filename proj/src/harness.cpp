#include "pebo_slam/harness.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>
#include <fstream>
#include <ostream>

#include "pebo_slam/errors.hpp"
#include "pebo_slam/eval/oracles.hpp"

namespace pebo {

namespace {

using sim::Vec3d;

std::vector<BodyLandmarkState<double>> make_baseline(const Scenario& s) {
  std::vector<BodyLandmarkState<double>> out;
  for (std::size_t i = 0; i < s.landmark_count(); ++i) {
    BodyLandmarkState<double> b;
    b.zb_hat = s.baseline.zb_hat0[i];
    b.cov = s.baseline.p0 * Mat3<double>::Identity();
    b.q_proc = s.baseline.q_proc;
    b.r_meas = s.baseline.r_meas;
    b.p0 = s.baseline.p0;
    out.push_back(b);
  }
  return out;
}

}  // namespace

Pipeline::Pipeline(const Scenario& scenario)
    : scenario_(scenario),
      profile_(scenario.segments),
      field_(scenario.landmarks, scenario.n_localization),
      noise_(scenario.noise.seed),
      steps_total_(scenario.step_count()),
      truth_{0.0, scenario.initial_pose},
      extension_(VirtualPose<double>::start_at(scenario.extension_q0, scenario.extension_xi0)) {
  validate(scenario_);
  const std::size_t n = field_.size();
  measurements_ = {sim::bearings(truth_, field_), profile_.twist_at(0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    KelreState<double> k;
    k.alpha = scenario_.gains.alpha[i];
    kelre_.push_back(k);
    regressors_.push_back(drem_mix(k));
    estimators_.push_back(LandmarkEstimatorState<double>::start(
        scenario_.init.chi0[i], scenario_.init.zv_hat0[i], scenario_.gains.gamma[i],
        scenario_.gains.k_i[i]));
  }
  integral_.resize(n);
  bank_ = BarFilterBank<double>::create(field_.n_localization(),
                                        std::span<const double>(scenario_.gains.rho),
                                        scenario_.gains.t_star, extension_, scenario_.initial_pose);
  pose_.qc_hat = scenario_.init.qc_hat0;
  pose_.x_hat = scenario_.init.x_hat0;
  pose_.k = scenario_.gains.k_att;
  pose_.sigma = scenario_.gains.sigma;
  baseline_ = make_baseline(scenario_);
}

std::vector<Vec3d> Pipeline::zv_hats() const {
  std::vector<Vec3d> out;
  out.reserve(estimators_.size());
  for (const auto& e : estimators_) out.push_back(e.zv_hat);
  return out;
}

void Pipeline::step() {
  if (done()) throw ProfileExhausted("pipeline already reached t_final");
  const double dt = scenario_.dt;
  const double t_mid = (static_cast<double>(step_index_) + 0.5) * dt;
  const sim::Twistd& u = profile_.twist_at(t_mid);

  truth_ = sim::step_true(truth_, profile_, dt);
  truth_.t = static_cast<double>(step_index_ + 1) * dt;
  const auto y = sim::bearings(truth_, field_);
  measurements_ = sim::corrupt(y, u, scenario_.noise, noise_);
  extension_ = step_extension(extension_, measurements_.twist, dt);

  for (std::size_t i = 0; i < field_.size(); ++i) {
    const auto lre = make_lre(extension_, measurements_.bearings[i]);
    kelre_[i] = kelre_step(kelre_[i], lre, dt);
    regressors_[i] = drem_mix(kelre_[i]);
    estimators_[i] = landmark_step(estimators_[i], regressors_[i], dt);
    if (scenario_.pure_integral_diagnostic) integral_[i].step(regressors_[i], dt);
  }

  const auto zv = zv_hats();
  const std::span<const Vec3d> zv_span(zv);
  bank_ = bar_filter_step(bank_, extension_, std::span<const Vec3d>(measurements_.bearings),
                          truth_.t, dt);
  pose_ = attitude_step(pose_, bank_, zv_span, extension_, dt);
  pose_ = position_step(pose_, bank_, zv_span, extension_, measurements_.twist, dt);

  for (std::size_t i = 0; i < field_.size(); ++i) {
    baseline_[i] = kf_step(baseline_[i], measurements_.twist, measurements_.bearings[i], dt);
  }
  ++step_index_;
  check_finite();
}

void Pipeline::check_finite() const {
  auto fail = [this](const std::string& what) {
    throw NumericFailure("non-finite " + what + " at t = " + std::to_string(truth_.t));
  };
  if (!extension_.q.allFinite() || !extension_.xi.allFinite()) fail("extension state");
  for (std::size_t i = 0; i < estimators_.size(); ++i) {
    const auto& e = estimators_[i];
    if (!kelre_[i].qe.allFinite() || !kelre_[i].phi.allFinite()) fail("K-ELRE state");
    if (!e.chi.allFinite() || !std::isfinite(e.omega) || !e.zv_hat.allFinite()) {
      fail("landmark observer state");
    }
    if (!baseline_[i].zb_hat.allFinite() || !baseline_[i].cov.allFinite()) fail("baseline state");
  }
  for (const auto& f : bank_.filters) {
    if (!f.zbar.allFinite() || !f.ybar.allFinite() || !f.phibar.allFinite()) fail("bar filter");
  }
  if (!pose_.qc_hat.allFinite() || !pose_.x_hat.allFinite()) fail("pose estimate");
}

StepMetrics Pipeline::metrics() const {
  StepMetrics m;
  m.t = truth_.t;
  m.true_pose = truth_.pose;
  m.est_pose = {pose_.r_hat(extension_), pose_.x_hat};
  m.att_err = (m.est_pose.rot - m.true_pose.rot).norm();
  m.pos_err = (m.est_pose.pos - m.true_pose.pos).norm();

  const auto zv = zv_hats();
  const auto z_hat = inertial_landmarks(pose_, std::span<const Vec3d>(zv), extension_);
  double norm_max = std::max({extension_.xi.norm(), pose_.x_hat.norm()});
  for (std::size_t i = 0; i < field_.size(); ++i) {
    LandmarkMetrics lm;
    lm.zv_true = eval::oracle_zv(truth_.pose, extension_, field_[i]);
    lm.zv_hat = zv[i];
    lm.zv_err = (zv[i] - lm.zv_true).norm();
    lm.z_err = (z_hat[i] - field_[i]).norm();
    lm.zb_err = (baseline_[i].zb_hat - eval::body_landmark(truth_.pose, field_[i])).norm();
    lm.delta = regressors_[i].delta;
    lm.delta_e = effective_gain(estimators_[i], regressors_[i]);
    lm.omega = estimators_[i].omega;
    lm.virtual_bearing = (extension_.q * measurements_.bearings[i]).normalized();
    m.landmarks.push_back(lm);

    const auto& e = estimators_[i];
    norm_max = std::max({norm_max, e.chi.norm(), e.zv_hat.norm(), std::abs(e.omega),
                         kelre_[i].qe.norm(), kelre_[i].phi.norm(), regressors_[i].big_y.norm(),
                         baseline_[i].zb_hat.norm(), baseline_[i].cov.norm()});
  }
  for (const auto& f : bank_.filters) {
    norm_max = std::max({norm_max, f.zbar.norm(), f.ybar.norm(), f.phibar.norm()});
  }
  m.max_state_norm = norm_max;
  return m;
}

std::string csv_header(std::size_t n) {
  std::string h = "t,x,y,z";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) h += fmt::format(",r{}{}", r, c);
  }
  h += ",x_hat,y_hat,z_hat";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) h += fmt::format(",rh{}{}", r, c);
  }
  h += ",att_err,pos_err";
  for (std::size_t i = 1; i <= n; ++i) {
    h += fmt::format(",zv_err{0},z_err{0},zb_err{0},delta{0},delta_e{0},omega{0},bv{0}_x,bv{0}_y,bv{0}_z",
                     i);
  }
  return h;
}

std::string csv_row(const StepMetrics& m) {
  fmt::memory_buffer buf;
  auto out = std::back_inserter(buf);
  fmt::format_to(out, "{:.6f}", m.t);
  auto put = [&out](double v) { fmt::format_to(out, ",{:.12e}", v); };
  for (int k = 0; k < 3; ++k) put(m.true_pose.pos(k));
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) put(m.true_pose.rot(r, c));
  }
  for (int k = 0; k < 3; ++k) put(m.est_pose.pos(k));
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) put(m.est_pose.rot(r, c));
  }
  put(m.att_err);
  put(m.pos_err);
  for (const auto& lm : m.landmarks) {
    put(lm.zv_err);
    put(lm.z_err);
    put(lm.zb_err);
    put(lm.delta);
    put(lm.delta_e);
    put(lm.omega);
    for (int k = 0; k < 3; ++k) put(lm.virtual_bearing(k));
  }
  return fmt::to_string(buf);
}

RunSummary run(const Scenario& scenario, std::ostream* csv, const StepObserver& observer) {
  Pipeline p(scenario);
  RunSummary summary;
  summary.scenario = scenario.name;
  summary.seed = scenario.noise.seed;
  summary.noise = scenario.noise.enabled;
  summary.t_final = scenario.t_final;

  if (csv) *csv << csv_header(p.field().size()) << '\n';
  StepMetrics m = p.metrics();
  summary.max_state_norm = m.max_state_norm;
  if (observer) observer(p, m);
  const auto decimate = static_cast<std::size_t>(scenario.output.decimate);
  while (!p.done()) {
    p.step();
    m = p.metrics();
    summary.max_state_norm = std::max(summary.max_state_norm, m.max_state_norm);
    if (observer) observer(p, m);
    if (csv && p.step_index() % decimate == 0) *csv << csv_row(m) << '\n';
  }
  summary.steps = p.step_index();
  summary.terminal = m;
  for (const auto& b : p.baseline()) summary.baseline_collapse_events += b.collapse_events;
  for (const auto& f : p.bar_bank().filters) summary.weak_excitation.push_back(f.weak_excitation);
  return summary;
}

void write_summary(std::ostream& out, const RunSummary& s) {
  YAML::Emitter e;
  e.SetDoublePrecision(10);
  e << YAML::BeginMap;
  e << YAML::Key << "scenario" << YAML::Value << s.scenario;
  e << YAML::Key << "seed" << YAML::Value << s.seed;
  e << YAML::Key << "noise" << YAML::Value << s.noise;
  e << YAML::Key << "steps" << YAML::Value << s.steps;
  e << YAML::Key << "t_final" << YAML::Value << s.t_final;
  e << YAML::Key << "terminal" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "t" << YAML::Value << s.terminal.t;
  e << YAML::Key << "pos_err" << YAML::Value << s.terminal.pos_err;
  e << YAML::Key << "att_err" << YAML::Value << s.terminal.att_err;
  e << YAML::Key << "landmarks" << YAML::Value << YAML::BeginSeq;
  for (const auto& lm : s.terminal.landmarks) {
    e << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "zv_err" << YAML::Value << lm.zv_err;
    e << YAML::Key << "z_err" << YAML::Value << lm.z_err;
    e << YAML::Key << "zb_err" << YAML::Value << lm.zb_err;
    e << YAML::Key << "delta" << YAML::Value << lm.delta;
    e << YAML::Key << "delta_e" << YAML::Value << lm.delta_e;
    e << YAML::Key << "omega" << YAML::Value << lm.omega;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq << YAML::EndMap;
  e << YAML::Key << "max_state_norm" << YAML::Value << s.max_state_norm;
  e << YAML::Key << "baseline_collapse_events" << YAML::Value << s.baseline_collapse_events;
  e << YAML::Key << "weak_excitation" << YAML::Value << YAML::Flow << s.weak_excitation;
  e << YAML::EndMap;
  out << e.c_str() << '\n';
}

RunSummary run_to_directory(const Scenario& scenario, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / (scenario.name + ".csv"));
  if (!csv) throw std::runtime_error("cannot write CSV in " + dir.string());
  const RunSummary summary = run(scenario, &csv);
  std::ofstream out(dir / (scenario.name + "_summary.yaml"));
  write_summary(out, summary);
  return summary;
}

RecordedBearings read_run_csv(std::istream& in) {
  RecordedBearings rec;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv", "empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto column = [&header](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto t_col = column("t");
  if (!t_col) throw ConfigError("csv header", "missing column t");
  std::vector<std::array<std::size_t, 3>> bv_cols;
  for (std::size_t i = 1;; ++i) {
    const auto cx = column(fmt::format("bv{}_x", i));
    const auto cy = column(fmt::format("bv{}_y", i));
    const auto cz = column(fmt::format("bv{}_z", i));
    if (!cx || !cy || !cz) break;
    bv_cols.push_back({*cx, *cy, *cz});
  }
  if (bv_cols.empty()) throw ConfigError("csv header", "no bv<i>_x/y/z columns");

  std::size_t line_no = 1;
  std::vector<double> cells;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    cells.clear();
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("csv line {}", line_no), "not a number: " + cell);
      }
    }
    if (cells.size() != header.size()) {
      throw ConfigError(fmt::format("csv line {}", line_no),
                        fmt::format("expected {} cells, got {}", header.size(), cells.size()));
    }
    rec.t.push_back(cells[*t_col]);
    std::vector<sim::Vec3d> row;
    for (const auto& c : bv_cols) row.emplace_back(cells[c[0]], cells[c[1]], cells[c[2]]);
    rec.bearings.push_back(std::move(row));
  }
  return rec;
}

namespace {

double lambda_min(const Mat3<double>& m) {
  Eigen::SelfAdjointEigenSolver<Mat3<double>> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

std::vector<ExcitationCertificate> excitation_report(const RecordedBearings& record,
                                                     const ExcitationOptions& options) {
  const std::size_t rows = record.t.size();
  const std::size_t n = record.landmark_count();
  std::vector<ExcitationCertificate> certs(n);
  if (rows == 0) return certs;
  constexpr double kTimeTol = 1e-9;

  // Each row covers (t_{k-1}, t_k]; the first row starts at t = 0.
  std::vector<double> t_prev(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    t_prev[k] = k == 0 ? std::min(0.0, record.t[0]) : record.t[k - 1];
  }
  const double t_begin = t_prev[0];
  const double t_end = record.t.back();
  const double t0 = options.t0;
  const double tc = options.tc.value_or(std::max(0.0, t_end - t0));

  for (std::size_t i = 0; i < n; ++i) {
    // cum[k + 1] = integral up to t_k, cum[0] = 0 at t_begin.
    std::vector<Mat3<double>> cum(rows + 1, Mat3<double>::Zero());
    for (std::size_t k = 0; k < rows; ++k) {
      cum[k + 1] = cum[k] + projector(record.bearings[k][i]) * (record.t[k] - t_prev[k]);
    }
    // Integral up to time s: last boundary at or before s.
    auto cum_at = [&](double s) -> const Mat3<double>& {
      if (s < record.t[0] - kTimeTol) return cum[0];
      const auto it = std::upper_bound(record.t.begin(), record.t.end(), s + kTimeTol);
      return cum[static_cast<std::size_t>(it - record.t.begin())];
    };

    auto& c = certs[i];
    c.t0 = t0;
    c.tc = tc;
    const Mat3<double>& base = cum_at(t0);
    c.ie_delta = lambda_min(cum_at(t0 + tc) - base);
    c.ie = c.ie_delta >= options.delta_min;
    for (std::size_t k = 0; k < rows; ++k) {
      if (record.t[k] <= t0 + kTimeTol) continue;
      if (lambda_min(cum[k + 1] - base) >= options.delta_min) {
        c.ie_tc_min = record.t[k] - t0;
        break;
      }
    }

    c.pe_window = options.pe_window;
    bool any_window = false;
    double worst = std::numeric_limits<double>::infinity();
    std::size_t b = 0;
    for (std::size_t a = 0; a <= rows; ++a) {
      const double start = a == 0 ? t_begin : record.t[a - 1];
      const double stop = start + options.pe_window;
      if (stop > t_end + kTimeTol) break;
      while (b < rows && record.t[b] < stop - kTimeTol) ++b;
      worst = std::min(worst, lambda_min(cum[b + 1] - cum[a]));
      any_window = true;
    }
    c.pe_delta = any_window ? worst : 0.0;
    c.pe = any_window && c.pe_delta >= options.delta_min;
  }
  return certs;
}

void write_excitation_report(std::ostream& out, const std::vector<ExcitationCertificate>& certs) {
  out << fmt::format("{:>8} {:>10} {:>10} {:>13} {:>12} {:>4} {:>8} {:>13} {:>4}\n", "landmark",
                     "t0", "tc", "ie_delta", "ie_tc_min", "ie", "window", "pe_delta", "pe");
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const auto& c = certs[i];
    const std::string tc_min = c.ie_tc_min ? fmt::format("{:.3f}", *c.ie_tc_min) : "never";
    out << fmt::format("{:>8} {:>10.3f} {:>10.3f} {:>13.6e} {:>12} {:>4} {:>8.3f} {:>13.6e} {:>4}\n",
                       i + 1, c.t0, c.tc, c.ie_delta, tc_min, c.ie ? "yes" : "no", c.pe_window,
                       c.pe_delta, c.pe ? "yes" : "no");
  }
}

}  // namespace pebo
