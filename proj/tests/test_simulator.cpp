#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pebo_slam/errors.hpp"
#include "pebo_slam/scenario.hpp"
#include "pebo_slam/simulator.hpp"
#include "test_support.hpp"

namespace pebo::sim {
namespace {

using testing::Mat3d;

constexpr double kPi = std::numbers::pi;

TrajectoryProfile arc_then_stop() {
  return TrajectoryProfile({Segment{0.0, 12.0, Twistd{Vec3d(0, 0, -0.4), Vec3d(1, 0, 0)}},
                            Segment{12.0, 30.0, Twistd::zero()}});
}

SimState sec4_start() { return {0.0, Posed{rotz(kPi / 6), Vec3d(1, 1, 2)}}; }

TEST(TrajectoryProfile, RejectsGapsAndEmptySegments) {
  EXPECT_THROW(TrajectoryProfile({Segment{0.5, 1.0, Twistd::zero()}}), std::invalid_argument);
  EXPECT_THROW(TrajectoryProfile({Segment{0.0, 1.0, Twistd::zero()},
                                  Segment{1.5, 2.0, Twistd::zero()}}),
               std::invalid_argument);
  EXPECT_THROW(TrajectoryProfile({Segment{0.0, 0.0, Twistd::zero()}}), std::invalid_argument);
}

TEST(TrajectoryProfile, BoundaryBelongsToLaterSegment) {
  const auto p = arc_then_stop();
  EXPECT_EQ(p.twist_at(0.0).vel, Vec3d(1, 0, 0));
  EXPECT_EQ(p.twist_at(11.999).vel, Vec3d(1, 0, 0));
  EXPECT_EQ(p.twist_at(12.0).vel, Vec3d::Zero());
  EXPECT_EQ(p.twist_at(30.0).vel, Vec3d::Zero());
  EXPECT_THROW(p.twist_at(30.5), ProfileExhausted);
  EXPECT_THROW(p.twist_at(-0.1), ProfileExhausted);
}

TEST(StepTrue, ZeroTwistLeavesStateUnchanged) {
  const auto p = TrajectoryProfile::stationary(1.0);
  SimState s = sec4_start();
  for (int k = 0; k < 100; ++k) s = step_true(s, p, 1e-3);
  EXPECT_EQ(s.pose.rot, sec4_start().pose.rot);
  EXPECT_EQ(s.pose.pos, sec4_start().pose.pos);
}

TEST(StepTrue, CircularArcOracle) {
  const auto p = arc_then_stop();
  SimState s = sec4_start();
  const double theta0 = kPi / 6;
  const Vec3d centre = s.pose.pos + 2.5 * Vec3d(std::sin(theta0), -std::cos(theta0), 0);
  double worst_pos = 0.0, worst_rot = 0.0, worst_ortho = 0.0;
  for (int k = 1; k <= 12000; ++k) {
    s = step_true(s, p, 1e-3);
    const double t = k * 1e-3;
    const double theta = theta0 - 0.4 * t;
    const Vec3d expected = Vec3d(1, 1, 2) + 2.5 * Vec3d(std::sin(theta0) - std::sin(theta),
                                                        std::cos(theta) - std::cos(theta0), 0);
    worst_pos = std::max(worst_pos, (s.pose.pos - expected).norm());
    worst_rot = std::max(worst_rot, (s.pose.rot - rotz(theta)).norm());
    worst_ortho = std::max(worst_ortho, orthonormality_error(s.pose.rot));
    ASSERT_NEAR(s.pose.pos.z(), 2.0, 1e-12);
    ASSERT_NEAR((s.pose.pos - centre).head<2>().norm(), 2.5, 1e-9);
  }
  EXPECT_LE(worst_pos, 1e-9);
  EXPECT_LE(worst_rot, 1e-9);
  EXPECT_LE(worst_ortho, 1e-9);
}

TEST(StepTrue, ConstantAfterStop) {
  const auto p = arc_then_stop();
  SimState s = sec4_start();
  for (int k = 0; k < 12000; ++k) s = step_true(s, p, 1e-3);
  const Posed at_stop = s.pose;
  double worst_ortho = 0.0;
  for (int k = 0; k < 18000; ++k) {
    s = step_true(s, p, 1e-3);
    ASSERT_EQ(s.pose.pos, at_stop.pos);
    ASSERT_EQ(s.pose.rot, at_stop.rot);
    worst_ortho = std::max(worst_ortho, orthonormality_error(s.pose.rot));
  }
  EXPECT_LE(worst_ortho, 1e-9);
  EXPECT_THROW(step_true(s, p, 1e-3), ProfileExhausted);
}

TEST(StepTrue, StepAcrossBoundaryIsExact) {
  // A 0.7 s step that straddles t = 12 equals 0.5 s of arc followed by rest.
  const auto p = arc_then_stop();
  SimState a{11.5, sec4_start().pose};
  SimState b = a;
  a = step_true(a, p, 0.7);
  b = step_true(b, p, 0.5);
  b = step_true(b, p, 0.2);
  EXPECT_LE((a.pose.pos - b.pose.pos).norm(), 1e-12);
  EXPECT_LE((a.pose.rot - b.pose.rot).norm(), 1e-12);
}

TEST(LandmarkField, ValidatesInput) {
  const std::vector<Vec3d> good{Vec3d(5, 0, 1), Vec3d(4, 3, 2), Vec3d(0, 5, 1.5)};
  EXPECT_NO_THROW(LandmarkField(good, 3));
  EXPECT_THROW(LandmarkField(good, 2), std::invalid_argument);
  EXPECT_THROW(LandmarkField(good, 4), std::invalid_argument);
  // Collinear localization landmarks.
  EXPECT_THROW(LandmarkField({Vec3d(0, 0, 0), Vec3d(1, 1, 1), Vec3d(2, 2, 2)}, 3),
               std::invalid_argument);
  EXPECT_THROW(LandmarkField({Vec3d(0, 0, NAN), Vec3d(1, 0, 0), Vec3d(0, 1, 0)}, 3),
               std::invalid_argument);
}

TEST(Bearings, AxisCase) {
  const LandmarkField f({Vec3d(0, 0, 5), Vec3d(1, 0, 0), Vec3d(0, 1, 0)}, 3);
  const auto y = bearings(SimState{0.0, Posed::identity()}, f);
  EXPECT_EQ(y[0], Vec3d(0, 0, 1));
}

TEST(Bearings, RotationInvariance) {
  std::mt19937_64 rng(21);
  const LandmarkField f({Vec3d(5, 0, 1), Vec3d(4, 3, 2), Vec3d(0, 5, 1.5), Vec3d(-3, 4, 3)}, 3);
  const SimState s{0.0, Posed{testing::random_rotation(rng), Vec3d(0.2, -0.4, 1.0)}};
  const Mat3d q0 = testing::random_rotation(rng);
  SimState turned = s;
  turned.pose.rot = s.pose.rot * q0;
  const auto y = bearings(s, f);
  const auto y_turned = bearings(turned, f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_LE((y_turned[i] - q0.transpose() * y[i]).norm(), 1e-14);
  }
}

TEST(Bearings, InitialScenarioBearings) {
  const auto s = builtin_scenario("paper-sec4");
  const LandmarkField f(s.landmarks, s.n_localization);
  const auto y = bearings(SimState{0.0, s.initial_pose}, f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec3d d = f[i] - Vec3d(1, 1, 2);
    const Vec3d expected = rotz(kPi / 6).transpose() * d / d.norm();
    EXPECT_LE((y[i] - expected).norm(), 1e-15);
    EXPECT_NEAR(y[i].norm(), 1.0, 1e-12);
  }
}

TEST(Bearings, LandmarkAtCameraThrows) {
  const LandmarkField f({Vec3d(1, 0, 0), Vec3d(0, 1, 0), Vec3d(0, 0, 1)}, 3);
  try {
    bearings(SimState{0.0, Posed{Mat3d::Identity(), Vec3d(0, 1, 0)}}, f);
    FAIL() << "expected DegenerateBearing";
  } catch (const DegenerateBearing& e) {
    EXPECT_EQ(e.landmark(), 1u);
  }
}

TEST(Corrupt, DisabledOrZeroAmplitudeIsIdentity) {
  const std::vector<Vec3d> y{Vec3d(0, 0, 1), Vec3d(0.6, 0.8, 0)};
  const Twistd u{Vec3d(0.1, 0.2, 0.3), Vec3d(1, 2, 3)};
  NoiseSource rng(1);
  NoiseConfig off;
  const auto a = corrupt(y, u, off, rng);
  EXPECT_EQ(a.bearings, y);
  EXPECT_EQ(a.twist.omega, u.omega);
  EXPECT_EQ(a.twist.vel, u.vel);

  NoiseConfig zero{1, 0.0, 0.0, 0.0, true};
  const auto b = corrupt(y, u, zero, rng);
  EXPECT_EQ(b.bearings, y);
  EXPECT_EQ(b.twist.omega, u.omega);
  EXPECT_EQ(b.twist.vel, u.vel);
}

TEST(Corrupt, UnitBearingsAndBoundedTwistNoise) {
  const std::vector<Vec3d> y{Vec3d(0, 0, 1), Vec3d(0.6, 0.8, 0), Vec3d(1, 0, 0)};
  const Twistd u{Vec3d(0.1, 0.2, 0.3), Vec3d(1, 2, 3)};
  for (double amp : {0.01, 0.3, 5.0}) {
    NoiseSource rng(4);
    const NoiseConfig cfg{4, amp, amp, amp, true};
    for (int k = 0; k < 200; ++k) {
      const auto m = corrupt(y, u, cfg, rng);
      for (const auto& b : m.bearings) ASSERT_NEAR(b.norm(), 1.0, 1e-12);
      ASSERT_LE((m.twist.omega - u.omega).lpNorm<Eigen::Infinity>(), amp);
      ASSERT_LE((m.twist.vel - u.vel).lpNorm<Eigen::Infinity>(), amp);
    }
  }
}

TEST(Corrupt, SameSeedSameStream) {
  const std::vector<Vec3d> y{Vec3d(0, 0, 1), Vec3d(0.6, 0.8, 0)};
  const Twistd u{Vec3d(0.1, 0.2, 0.3), Vec3d(1, 2, 3)};
  const NoiseConfig cfg{99, 0.01, 0.01, 0.01, true};
  NoiseSource a(99), b(99), c(100);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const auto ma = corrupt(y, u, cfg, a);
    const auto mb = corrupt(y, u, cfg, b);
    const auto mc = corrupt(y, u, cfg, c);
    ASSERT_EQ(ma.bearings, mb.bearings);
    ASSERT_EQ(ma.twist.omega, mb.twist.omega);
    ASSERT_EQ(ma.twist.vel, mb.twist.vel);
    differs = differs || ma.bearings != mc.bearings;
  }
  EXPECT_TRUE(differs);
}

TEST(NoiseSource, UniformRangeAndMean) {
  NoiseSource rng(7);
  double sum = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const double x = rng.uniform(2.0);
    ASSERT_GE(x, -2.0);
    ASSERT_LE(x, 2.0);
    sum += x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
}

}  // namespace
}  // namespace pebo::sim
