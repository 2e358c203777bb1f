#ifndef PEBO_SLAM_SIMULATOR_HPP
#define PEBO_SLAM_SIMULATOR_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "pebo_slam/manifold.hpp"

namespace pebo::sim {

using Vec3d = Vec3<double>;
using Posed = Pose<double>;
using Twistd = Twist<double>;

struct Segment {
  double t_start = 0.0;
  double t_end = 0.0;
  Twistd twist;
};

/// Piecewise-constant body velocities over [0, t_final].
class TrajectoryProfile {
 public:
  TrajectoryProfile() = default;
  /// Throws std::invalid_argument unless the segments start at 0, are
  /// contiguous and each has positive length.
  explicit TrajectoryProfile(std::vector<Segment> segments);

  /// A single zero-twist segment; the robot never moves.
  static TrajectoryProfile stationary(double t_final);

  const std::vector<Segment>& segments() const { return segments_; }
  double end_time() const { return segments_.empty() ? 0.0 : segments_.back().t_end; }

  /// Twist of the segment containing t; a boundary time belongs to the later
  /// segment. Throws ProfileExhausted outside [0, end_time()].
  const Twistd& twist_at(double t) const;

 private:
  std::vector<Segment> segments_;
};

/// Static landmarks. The first `n_localization` must satisfy the
/// non-collinearity condition on consecutive differences.
class LandmarkField {
 public:
  LandmarkField(std::vector<Vec3d> landmarks, std::size_t n_localization);

  const std::vector<Vec3d>& landmarks() const { return landmarks_; }
  const Vec3d& operator[](std::size_t i) const { return landmarks_[i]; }
  std::size_t size() const { return landmarks_.size(); }
  std::size_t n_localization() const { return n_localization_; }

 private:
  std::vector<Vec3d> landmarks_;
  std::size_t n_localization_;
};

struct NoiseConfig {
  std::uint64_t seed = 1;
  double omega_amplitude = 0.01;    // rad/s half-width
  double vel_amplitude = 0.01;      // m/s half-width
  double bearing_amplitude = 0.01;  // per component, before renormalization
  bool enabled = false;
};

struct SimState {
  double t = 0.0;
  Posed pose;
};

/// Advances the true pose by dt under the profile. Integration is exact for
/// piecewise-constant twists, including steps straddling a segment boundary.
SimState step_true(const SimState& state, const TrajectoryProfile& profile, double dt);

/// Unit bearings y_i = R^T (z_i - x) / |z_i - x| in the body frame.
std::vector<Vec3d> bearings(const SimState& state, const LandmarkField& field);

/// Deterministic uniform noise stream. Uses the fully specified mt19937_64
/// output and an explicit 53-bit mantissa mapping so the stream does not
/// depend on the standard library's distribution implementation.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [-amplitude, amplitude].
  double uniform(double amplitude);

 private:
  std::mt19937_64 engine_;
};

struct Measurements {
  std::vector<Vec3d> bearings;
  Twistd twist;
};

/// Adds uniform noise to twist and bearings; noisy bearings are renormalized.
/// A disabled config or zero amplitude leaves the corresponding signal
/// bit-identical.
Measurements corrupt(const std::vector<Vec3d>& y, const Twistd& u, const NoiseConfig& cfg,
                     NoiseSource& rng);

}  // namespace pebo::sim

#endif  // PEBO_SLAM_SIMULATOR_HPP
