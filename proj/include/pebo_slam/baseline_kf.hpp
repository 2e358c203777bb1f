#ifndef PEBO_SLAM_BASELINE_KF_HPP
#define PEBO_SLAM_BASELINE_KF_HPP

// Robocentric landmark filter used as the comparison baseline. The landmark
// is tracked in the body frame, z^B = R^T (z - x), whose dynamics
// z^B' = -Omega x z^B - v are linear time-varying. The bearing enters as the
// pseudo-measurement Pi_y z^B = 0. Needs uniform complete observability to
// converge; stalls once the robot stops moving.

#include <Eigen/Cholesky>

#include "pebo_slam/manifold.hpp"

namespace pebo {

template <typename Scalar>
struct BodyLandmarkState {
  Vec3<Scalar> zb_hat = Vec3<Scalar>::Zero();
  Mat3<Scalar> cov = Mat3<Scalar>::Identity() * Scalar(10);
  Scalar q_proc = Scalar(1e-4);  // process noise intensity, per second
  Scalar r_meas = Scalar(1e-2);  // pseudo-measurement variance
  Scalar p0 = Scalar(10);        // prior variance, also the reset value
  int collapse_events = 0;
};

/// Predict with the exact constant-twist transition
///   z^B <- exp(-Omega dt)(z^B - J(Omega dt) v dt)
/// then apply the Joseph-form update for Pi_y z^B = 0. If the covariance
/// loses positive definiteness it is reset to p0 * I and the event counted.
template <typename Scalar>
BodyLandmarkState<Scalar> kf_step(BodyLandmarkState<Scalar> s, const Twist<Scalar>& u,
                                  const Vec3<Scalar>& y, Scalar dt) {
  using M3 = Mat3<Scalar>;
  const Vec3<Scalar> phi = u.omega * dt;
  const M3 f = exp_so3(phi).transpose();
  s.zb_hat = f * (s.zb_hat - left_jacobian_so3(phi) * (u.vel * dt));
  s.cov = f * s.cov * f.transpose() + (s.q_proc * dt) * M3::Identity();

  const M3 h = projector(y);
  const M3 r = s.r_meas * M3::Identity();
  const M3 innov_cov = h * s.cov * h.transpose() + r;
  const M3 gain = s.cov * h.transpose() * innov_cov.inverse();
  s.zb_hat += gain * (-(h * s.zb_hat));
  const M3 i_kh = M3::Identity() - gain * h;
  s.cov = i_kh * s.cov * i_kh.transpose() + gain * r * gain.transpose();
  s.cov = Scalar(0.5) * (s.cov + s.cov.transpose());

  Eigen::LLT<M3> llt(s.cov);
  if (llt.info() != Eigen::Success || !s.cov.allFinite()) {
    s.cov = s.p0 * M3::Identity();
    ++s.collapse_events;
  }
  return s;
}

}  // namespace pebo

#endif  // PEBO_SLAM_BASELINE_KF_HPP
