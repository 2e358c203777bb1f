// Command-line front end: run scenarios, certify excitation from a run CSV,
// list the built-in scenarios.
//
// Exit codes: 0 success, 1 configuration or input error, 2 numeric failure.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <optional>

#include "pebo_slam/errors.hpp"
#include "pebo_slam/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  bool noise = false;
  std::optional<std::string> out;
  std::optional<int> decimate;
};

struct ReportArgs {
  std::string csv;
  pebo::ExcitationOptions options;
  std::optional<double> tc;
};

int do_run(const RunArgs& args) {
  pebo::Scenario s = pebo::resolve_scenario(args.scenario);
  if (args.seed) s.noise.seed = *args.seed;
  if (args.noise) s.noise.enabled = true;
  if (args.out) s.output.dir = *args.out;
  if (args.decimate) s.output.decimate = *args.decimate;
  pebo::validate(s);

  const pebo::RunSummary summary = pebo::run_to_directory(s, s.output.dir);
  pebo::write_summary(std::cout, summary);
  std::cerr << fmt::format("wrote {}/{}.csv\n", s.output.dir.string(), s.name);
  return kExitOk;
}

int do_report(const ReportArgs& args) {
  std::ifstream in(args.csv);
  if (!in) throw pebo::ConfigError("", "cannot open " + args.csv);
  auto options = args.options;
  options.tc = args.tc;
  const auto record = pebo::read_run_csv(in);
  pebo::write_excitation_report(std::cout, pebo::excitation_report(record, options));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bearing-only SLAM observer simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write CSV + summary");
  run->add_option("scenario", run_args.scenario, "Scenario file or builtin name")->required();
  run->add_option("--seed", run_args.seed, "Noise seed");
  run->add_flag("--noise", run_args.noise, "Enable measurement noise");
  run->add_option("--out", run_args.out, "Output directory");
  run->add_option("--decimate", run_args.decimate, "Write one CSV row every K steps")
      ->check(CLI::PositiveNumber);

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Excitation certificates from a run CSV");
  report->add_option("csv", report_args.csv, "CSV written by 'run'")->required();
  report->add_option("--t0", report_args.options.t0, "Start of the IE interval")
      ->capture_default_str();
  report->add_option("--tc", report_args.tc, "Length of the IE interval (default: rest of run)");
  report->add_option("--window", report_args.options.pe_window, "PE window length")
      ->capture_default_str();
  report->add_option("--delta-min", report_args.options.delta_min, "Excitation threshold")
      ->capture_default_str();

  auto* scenarios = app.add_subcommand("scenarios", "Built-in scenarios");
  scenarios->require_subcommand(1);
  auto* list = scenarios->add_subcommand("list", "List builtin scenario names");
  std::string show_name;
  auto* show = scenarios->add_subcommand("show", "Print a builtin scenario as a scenario file");
  show->add_option("name", show_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return do_run(run_args);
    if (*report) return do_report(report_args);
    if (*list) {
      for (const auto& name : pebo::builtin_scenario_names()) std::cout << name << '\n';
      return kExitOk;
    }
    if (*show) {
      std::cout << pebo::to_yaml(pebo::builtin_scenario(show_name));
      return kExitOk;
    }
  } catch (const pebo::NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const pebo::DegenerateBearing& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
