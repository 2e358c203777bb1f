#ifndef PEBO_SLAM_SCENARIO_HPP
#define PEBO_SLAM_SCENARIO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "pebo_slam/simulator.hpp"

namespace pebo {

inline constexpr int kScenarioSchemaVersion = 1;

struct ObserverGains {
  std::vector<double> alpha;   // per landmark
  std::vector<double> gamma;   // per landmark
  std::vector<double> k_i;     // per landmark
  std::vector<double> rho;     // per localization landmark
  std::vector<double> k_att;   // per consecutive localization pair
  std::vector<double> sigma;   // per localization landmark
  double t_star = 12.0;
};

struct ObserverInit {
  std::vector<sim::Vec3d> chi0;    // per landmark
  std::vector<sim::Vec3d> zv_hat0; // per landmark
  Rotation3<double> qc_hat0 = Rotation3<double>::Identity();
  sim::Vec3d x_hat0 = sim::Vec3d::Zero();
};

struct BaselineConfig {
  double q_proc = 1e-4;
  double r_meas = 1e-2;
  double p0 = 10.0;
  std::vector<sim::Vec3d> zb_hat0;  // per landmark
};

struct OutputConfig {
  std::filesystem::path dir = "out";
  int decimate = 10;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name = "unnamed";
  double dt = 1e-3;
  double t_final = 30.0;
  sim::Posed initial_pose;
  Rotation3<double> extension_q0 = Rotation3<double>::Identity();
  sim::Vec3d extension_xi0 = sim::Vec3d::Zero();
  std::vector<sim::Segment> segments;
  std::vector<sim::Vec3d> landmarks;
  std::size_t n_localization = 3;
  sim::NoiseConfig noise;
  ObserverGains gains;
  ObserverInit init;
  BaselineConfig baseline;
  OutputConfig output;
  bool pure_integral_diagnostic = false;

  std::size_t landmark_count() const { return landmarks.size(); }
  std::size_t step_count() const;
};

/// Fills per-landmark vectors left empty with the defaults for the current
/// landmark count (alpha 5, gamma 100, kI 20, rho/k/sigma 1, zero inits).
void apply_defaults(Scenario& s);

/// Throws ConfigError naming the offending field.
void validate(const Scenario& s);

/// Parses the YAML scenario schema; defaults are applied and the result is
/// validated. Errors carry "line N, field F" diagnostics.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Built-in scenarios: "paper-sec4", "wide-landmarks", "static".
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

/// A builtin name or a path to a scenario file.
Scenario resolve_scenario(const std::string& name_or_path);

/// Canonical YAML text for a scenario; parse_scenario(to_yaml(s)) == s.
std::string to_yaml(const Scenario& s);

}  // namespace pebo

#endif  // PEBO_SLAM_SCENARIO_HPP
