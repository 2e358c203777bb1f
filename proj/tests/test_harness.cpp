#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pebo_slam/errors.hpp"
#include "pebo_slam/harness.hpp"

namespace pebo {
namespace {

std::string run_csv(const Scenario& s) {
  std::ostringstream out;
  run(s, &out);
  return out.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(Harness, HeaderIsFixed) {
  const std::string h = csv_header(2);
  EXPECT_EQ(h.rfind("t,x,y,z,r00,r01,r02,r10", 0), 0u);
  EXPECT_NE(h.find(",att_err,pos_err,zv_err1,z_err1,zb_err1,delta1,delta_e1,omega1,bv1_x"),
            std::string::npos);
  EXPECT_EQ(h.substr(h.size() - 17), "bv2_x,bv2_y,bv2_z");
  EXPECT_EQ(std::count(h.begin(), h.end(), ','), 1 + 3 + 9 + 3 + 9 + 2 + 2 * 9 - 1);
}

TEST(Harness, ZeroDurationGivesHeaderOnly) {
  Scenario s = builtin_scenario("paper-sec4");
  s.t_final = 0.0;
  std::ostringstream out;
  const RunSummary r = run(s, &out);
  EXPECT_EQ(out.str(), csv_header(6) + "\n");
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(r.terminal.t, 0.0);
  ASSERT_EQ(r.terminal.landmarks.size(), 6u);
  // Initial errors: estimates start at zero.
  EXPECT_GT(r.terminal.pos_err, 1.0);
  EXPECT_GT(r.terminal.landmarks[0].zv_err, 1.0);
}

TEST(Harness, RowsAreDecimatedAndTimeIsMonotone) {
  Scenario s = builtin_scenario("paper-sec4");
  s.t_final = 1.0;
  s.output.decimate = 7;
  const auto lines = lines_of(run_csv(s));
  ASSERT_EQ(lines.size(), 1u + 1000u / 7u);
  double prev = 0.0;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const double t = std::stod(lines[k].substr(0, lines[k].find(',')));
    EXPECT_NEAR(t, 0.007 * k, 1e-9);
    EXPECT_GT(t, prev);
    prev = t;
    EXPECT_EQ(lines[k].find("nan"), std::string::npos);
    EXPECT_EQ(lines[k].find("inf"), std::string::npos);
  }
}

TEST(Harness, SameSeedSameBytes) {
  Scenario s = builtin_scenario("paper-sec4");
  s.t_final = 5.0;
  s.noise.enabled = true;
  s.noise.seed = 17;
  const std::string a = run_csv(s);
  const std::string b = run_csv(s);
  EXPECT_EQ(a, b);
  s.noise.seed = 18;
  EXPECT_NE(run_csv(s), a);
}

TEST(Harness, ObserverSeesEveryStep) {
  Scenario s = builtin_scenario("paper-sec4");
  s.t_final = 0.05;
  std::vector<double> times;
  run(s, nullptr, [&times](const Pipeline&, const StepMetrics& m) { times.push_back(m.t); });
  ASSERT_EQ(times.size(), 51u);
  EXPECT_EQ(times.front(), 0.0);
  EXPECT_DOUBLE_EQ(times.back(), 0.05);
}

TEST(Harness, NoiseFreeSec4Converges) {
  const RunSummary r = run(builtin_scenario("paper-sec4"));
  EXPECT_EQ(r.steps, 30000u);
  EXPECT_LE(r.terminal.pos_err, 5e-2);
  EXPECT_LE(r.terminal.att_err, 5e-2);
  EXPECT_LT(r.max_state_norm, 1e6);
  EXPECT_EQ(r.weak_excitation, std::vector<bool>(3, false));
}

TEST(Harness, NonFiniteStateIsReported) {
  Scenario s = builtin_scenario("paper-sec4");
  s.t_final = 1.0;
  s.gains.sigma = {1e300, 1e300, 1e300};
  EXPECT_THROW(run(s), NumericFailure);
}

TEST(Harness, SteppingPastTheEndThrows) {
  Scenario s = builtin_scenario("static");
  s.t_final = 0.002;
  Pipeline p(s);
  p.step();
  p.step();
  EXPECT_TRUE(p.done());
  EXPECT_THROW(p.step(), ProfileExhausted);
}

TEST(Harness, RunToDirectoryWritesCsvAndSummary) {
  Scenario s = builtin_scenario("paper-sec4");
  s.t_final = 0.1;
  const auto dir = std::filesystem::temp_directory_path() / "pebo_harness_test";
  std::filesystem::remove_all(dir);
  run_to_directory(s, dir);
  std::ifstream csv(dir / "paper-sec4.csv");
  std::ifstream summary(dir / "paper-sec4_summary.yaml");
  ASSERT_TRUE(csv.good());
  ASSERT_TRUE(summary.good());
  std::stringstream text;
  text << summary.rdbuf();
  EXPECT_NE(text.str().find("max_state_norm:"), std::string::npos);
  EXPECT_NE(text.str().find("scenario: paper-sec4"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Excitation, StaticRobotNeverPersistentlyExcited) {
  Scenario s = builtin_scenario("static");
  s.t_final = 10.0;
  std::stringstream csv(run_csv(s));
  const auto certs = excitation_report(read_run_csv(csv));
  ASSERT_EQ(certs.size(), 6u);
  for (const auto& c : certs) {
    EXPECT_FALSE(c.pe);
    EXPECT_FALSE(c.ie);
    EXPECT_FALSE(c.ie_tc_min.has_value());
    EXPECT_LT(c.pe_delta, 1e-9);
  }
}

TEST(Excitation, Sec4IntervalButNotPersistent) {
  std::stringstream csv(run_csv(builtin_scenario("paper-sec4")));
  const auto record = read_run_csv(csv);
  ASSERT_EQ(record.landmark_count(), 6u);
  ExcitationOptions opt;
  opt.t0 = 0.0;
  opt.tc = 12.0;
  const auto certs = excitation_report(record, opt);
  for (const auto& c : certs) {
    EXPECT_TRUE(c.ie);
    EXPECT_GE(c.ie_delta, 1e-3);
    ASSERT_TRUE(c.ie_tc_min.has_value());
    EXPECT_LE(*c.ie_tc_min, 12.0);
    EXPECT_FALSE(c.pe);
  }
}

TEST(Excitation, WindowScanMatchesDirectOracle) {
  // Bearing rotating about z at 1 rad/s; every 1 s window integrates
  // Pi over a 1 rad arc, whose smallest eigenvalue is known in closed form:
  // int (1 - cos^2) and int (1 - sin^2) over [a, a+1] with the z-axis always 1.
  RecordedBearings rec;
  const double dt = 1e-3;
  for (int k = 1; k <= 5000; ++k) {
    const double t = k * dt;
    rec.t.push_back(t);
    rec.bearings.push_back({sim::Vec3d(std::cos(t), std::sin(t), 0.0)});
  }
  ExcitationOptions opt;
  opt.delta_min = 1e-3;
  const auto c = excitation_report(rec, opt).front();
  // Projector onto the xy-plane part: eigenvalues of int [sin^2, -sc; -sc, cos^2]
  // over a unit window are (1 -+ sin(1)) / 2, independent of the start.
  EXPECT_NEAR(c.pe_delta, (1.0 - std::sin(1.0)) / 2.0, 1e-3);
  EXPECT_TRUE(c.pe);
}

TEST(Excitation, ReportFormatting) {
  ExcitationCertificate c;
  c.tc = 12.0;
  c.ie_delta = 0.5;
  c.ie = true;
  std::ostringstream out;
  write_excitation_report(out, {c});
  const auto lines = lines_of(out.str());
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_NE(lines[0].find("pe_delta"), std::string::npos);
  EXPECT_NE(lines[1].find("never"), std::string::npos);
}

TEST(Excitation, MalformedCsvIsAConfigError) {
  std::stringstream no_bearings("t,x\n0.1,2\n");
  EXPECT_THROW(read_run_csv(no_bearings), ConfigError);
  std::stringstream ragged("t,bv1_x,bv1_y,bv1_z\n0.1,1,0\n");
  EXPECT_THROW(read_run_csv(ragged), ConfigError);
}

}  // namespace
}  // namespace pebo
