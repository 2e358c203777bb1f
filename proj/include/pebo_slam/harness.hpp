#ifndef PEBO_SLAM_HARNESS_HPP
#define PEBO_SLAM_HARNESS_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pebo_slam/baseline_kf.hpp"
#include "pebo_slam/drem.hpp"
#include "pebo_slam/extension.hpp"
#include "pebo_slam/landmark_observer.hpp"
#include "pebo_slam/pose_observer.hpp"
#include "pebo_slam/scenario.hpp"
#include "pebo_slam/simulator.hpp"

namespace pebo {

/// Ground-truth comparison of one pipeline state.
struct LandmarkMetrics {
  double zv_err = 0.0;       // |zv_hat - z^v|
  double z_err = 0.0;        // |z_hat - z| (inertial)
  double zb_err = 0.0;       // |zb_hat - z^B| (baseline)
  double delta = 0.0;
  double delta_e = 0.0;
  double omega = 1.0;
  sim::Vec3d zv_true = sim::Vec3d::Zero();
  sim::Vec3d zv_hat = sim::Vec3d::Zero();
  sim::Vec3d virtual_bearing = sim::Vec3d::Zero();  // Q y, unit
};

struct StepMetrics {
  double t = 0.0;
  sim::Posed true_pose;
  sim::Posed est_pose;  // (R_hat, x_hat)
  double att_err = 0.0; // ||R_hat - R||_F
  double pos_err = 0.0; // |x_hat - x|
  std::vector<LandmarkMetrics> landmarks;
  double max_state_norm = 0.0;  // largest internal state norm at this step
};

/// Every module stepped once per dt, in the order
/// simulator -> corrupt -> extension -> drem -> landmark observer ->
/// pose observer -> baseline.
class Pipeline {
 public:
  explicit Pipeline(const Scenario& scenario);

  /// Advances one dt. Throws NumericFailure if any state becomes non-finite
  /// and ProfileExhausted past t_final.
  void step();
  bool done() const { return step_index_ >= steps_total_; }
  std::size_t step_index() const { return step_index_; }
  std::size_t steps_total() const { return steps_total_; }
  double time() const { return truth_.t; }

  const Scenario& scenario() const { return scenario_; }
  const sim::LandmarkField& field() const { return field_; }
  const sim::SimState& truth() const { return truth_; }
  const VirtualPose<double>& extension() const { return extension_; }
  const sim::Measurements& measurements() const { return measurements_; }
  const std::vector<KelreState<double>>& kelre() const { return kelre_; }
  const std::vector<ScalarRegressor<double>>& regressors() const { return regressors_; }
  const std::vector<LandmarkEstimatorState<double>>& landmark_estimators() const {
    return estimators_;
  }
  const BarFilterBank<double>& bar_bank() const { return bank_; }
  const PoseEstimate<double>& pose_estimate() const { return pose_; }
  const std::vector<BodyLandmarkState<double>>& baseline() const { return baseline_; }
  const std::vector<IntegralRegressor<double>>& integral_diagnostics() const {
    return integral_;
  }

  std::vector<sim::Vec3d> zv_hats() const;
  /// Computed against ground truth; evaluation only.
  StepMetrics metrics() const;

 private:
  void check_finite() const;

  Scenario scenario_;
  sim::TrajectoryProfile profile_;
  sim::LandmarkField field_;
  sim::NoiseSource noise_;
  std::size_t step_index_ = 0;
  std::size_t steps_total_ = 0;

  sim::SimState truth_;
  VirtualPose<double> extension_;
  sim::Measurements measurements_;
  std::vector<KelreState<double>> kelre_;
  std::vector<ScalarRegressor<double>> regressors_;
  std::vector<LandmarkEstimatorState<double>> estimators_;
  BarFilterBank<double> bank_;
  PoseEstimate<double> pose_;
  std::vector<BodyLandmarkState<double>> baseline_;
  std::vector<IntegralRegressor<double>> integral_;
};

struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  bool noise = false;
  std::size_t steps = 0;
  double t_final = 0.0;
  StepMetrics terminal;
  double max_state_norm = 0.0;
  int baseline_collapse_events = 0;
  std::vector<bool> weak_excitation;  // per localization landmark at T_star
};

/// Called after every step (and once at t = 0, before any step).
using StepObserver = std::function<void(const Pipeline&, const StepMetrics&)>;

/// Runs the scenario to t_final. Rows for steps whose 1-based index is a
/// multiple of `decimate` are written to `csv` when given.
RunSummary run(const Scenario& scenario, std::ostream* csv = nullptr,
               const StepObserver& observer = {});

/// Fixed CSV header for `n` landmarks.
std::string csv_header(std::size_t n);
std::string csv_row(const StepMetrics& m);

void write_summary(std::ostream& out, const RunSummary& summary);

/// Writes <dir>/<name>.csv and <dir>/<name>_summary.yaml.
RunSummary run_to_directory(const Scenario& scenario, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Excitation certificates from a recorded run.

struct RecordedBearings {
  std::vector<double> t;
  std::vector<std::vector<sim::Vec3d>> bearings;  // [row][landmark], virtual frame
  std::size_t landmark_count() const { return bearings.empty() ? 0 : bearings.front().size(); }
};

/// Parses the t and bv* columns of a run CSV.
RecordedBearings read_run_csv(std::istream& in);

struct ExcitationOptions {
  double t0 = 0.0;
  std::optional<double> tc;  // defaults to the rest of the record
  double pe_window = 1.0;
  double delta_min = 1e-3;
};

struct ExcitationCertificate {
  double t0 = 0.0;
  double tc = 0.0;
  double ie_delta = 0.0;                // lambda_min of the integral over [t0, t0 + tc]
  std::optional<double> ie_tc_min;      // shortest tc reaching delta_min
  bool ie = false;
  double pe_window = 0.0;
  double pe_delta = 0.0;                // min over window starts of lambda_min
  bool pe = false;
};

/// Rectangle-rule integrals of Pi_{Q y_i} over fixed and sliding windows.
std::vector<ExcitationCertificate> excitation_report(const RecordedBearings& record,
                                                     const ExcitationOptions& options = {});

void write_excitation_report(std::ostream& out,
                             const std::vector<ExcitationCertificate>& certs);

}  // namespace pebo

#endif  // PEBO_SLAM_HARNESS_HPP
