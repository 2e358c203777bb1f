#include "pebo_slam/simulator.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pebo::sim {

namespace {

double time_eps(double t) { return 1e-9 * std::max(1.0, std::abs(t)); }

}  // namespace

TrajectoryProfile::TrajectoryProfile(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw std::invalid_argument("trajectory profile has no segments");
  }
  if (std::abs(segments_.front().t_start) > time_eps(0.0)) {
    throw std::invalid_argument("trajectory profile must start at t = 0");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.t_end > s.t_start)) {
      throw std::invalid_argument("segment " + std::to_string(i) + " has non-positive length");
    }
    if (!s.twist.all_finite()) {
      throw std::invalid_argument("segment " + std::to_string(i) + " has a non-finite twist");
    }
    if (i > 0 && std::abs(s.t_start - segments_[i - 1].t_end) > time_eps(s.t_start)) {
      throw std::invalid_argument("segment " + std::to_string(i) +
                                  " is not contiguous with its predecessor");
    }
  }
}

TrajectoryProfile TrajectoryProfile::stationary(double t_final) {
  return TrajectoryProfile({Segment{0.0, t_final, Twistd::zero()}});
}

const Twistd& TrajectoryProfile::twist_at(double t) const {
  if (segments_.empty() || t < -time_eps(t) || t > end_time() + time_eps(t)) {
    throw ProfileExhausted("time " + std::to_string(t) + " outside trajectory profile");
  }
  for (const auto& s : segments_) {
    if (t < s.t_end - time_eps(t)) return s.twist;
  }
  return segments_.back().twist;
}

LandmarkField::LandmarkField(std::vector<Vec3d> landmarks, std::size_t n_localization)
    : landmarks_(std::move(landmarks)), n_localization_(n_localization) {
  if (n_localization_ < 3) {
    throw std::invalid_argument("at least three localization landmarks are required");
  }
  if (landmarks_.size() < n_localization_) {
    throw std::invalid_argument("fewer landmarks than the localization subset size");
  }
  for (const auto& z : landmarks_) {
    if (!z.allFinite()) throw std::invalid_argument("non-finite landmark coordinate");
  }
  std::vector<Vec3d> r;
  for (std::size_t i = 0; i + 1 < n_localization_; ++i) {
    r.push_back(landmarks_[i + 1] - landmarks_[i]);
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size(); ++j) {
      if (r[i].cross(r[j]).norm() <= 1e-6) {
        throw std::invalid_argument("localization landmarks " + std::to_string(i) + ", " +
                                    std::to_string(j) + " have parallel differences");
      }
    }
  }
}

SimState step_true(const SimState& state, const TrajectoryProfile& profile, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_true: dt must be positive");
  const double t_target = state.t + dt;
  if (t_target > profile.end_time() + time_eps(t_target)) {
    throw ProfileExhausted("step to t = " + std::to_string(t_target) +
                           " exceeds trajectory end " + std::to_string(profile.end_time()));
  }
  SimState next = state;
  double remaining = dt;
  for (const auto& seg : profile.segments()) {
    if (remaining <= 0.0) break;
    if (next.t >= seg.t_end - time_eps(next.t)) continue;
    const double h = std::min(remaining, seg.t_end - next.t);
    next.pose = pose_compose(next.pose, exp_se3(seg.twist, h));
    next.t += h;
    remaining -= h;
  }
  next.t = t_target;
  reorthonormalize_if_drifted(next.pose.rot);
  return next;
}

std::vector<Vec3d> bearings(const SimState& state, const LandmarkField& field) {
  std::vector<Vec3d> y;
  y.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Vec3d d = field[i] - state.pose.pos;
    const double n = d.norm();
    if (!(n > 1e-9)) throw DegenerateBearing(i);
    y.push_back(state.pose.rot.transpose() * (d / n));
  }
  return y;
}

double NoiseSource::uniform(double amplitude) {
  const double u01 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return amplitude * (2.0 * u01 - 1.0);
}

Measurements corrupt(const std::vector<Vec3d>& y, const Twistd& u, const NoiseConfig& cfg,
                     NoiseSource& rng) {
  Measurements m{y, u};
  if (!cfg.enabled) return m;
  if (cfg.omega_amplitude > 0.0) {
    for (int k = 0; k < 3; ++k) m.twist.omega(k) += rng.uniform(cfg.omega_amplitude);
  }
  if (cfg.vel_amplitude > 0.0) {
    for (int k = 0; k < 3; ++k) m.twist.vel(k) += rng.uniform(cfg.vel_amplitude);
  }
  if (cfg.bearing_amplitude > 0.0) {
    for (auto& b : m.bearings) {
      for (int k = 0; k < 3; ++k) b(k) += rng.uniform(cfg.bearing_amplitude);
      b.normalize();
    }
  }
  return m;
}

}  // namespace pebo::sim
