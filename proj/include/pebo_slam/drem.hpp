#ifndef PEBO_SLAM_DREM_HPP
#define PEBO_SLAM_DREM_HPP

// Per-landmark regression pipeline in the virtual frame:
//   bearing -> LRE  q = Pi z^v               (make_lre)
//           -> Kreisselmeier filter  qe = Phi z^v + eps   (kelre_step)
//           -> mixing  Y = adj(Phi) qe = det(Phi) z^v + eps   (drem_mix)

#include <algorithm>
#include <cmath>

#include "pebo_slam/extension.hpp"
#include "pebo_slam/manifold.hpp"

namespace pebo {

template <typename Scalar>
struct LreSample {
  Vec3<Scalar> q = Vec3<Scalar>::Zero();
  Mat3<Scalar> pi = Mat3<Scalar>::Zero();
};

template <typename Scalar>
struct KelreState {
  Vec3<Scalar> qe = Vec3<Scalar>::Zero();
  Mat3<Scalar> phi = Mat3<Scalar>::Zero();
  Scalar alpha = Scalar(5);
};

template <typename Scalar>
struct ScalarRegressor {
  Vec3<Scalar> big_y = Vec3<Scalar>::Zero();
  Scalar delta = Scalar(0);
};

/// Throws std::invalid_argument if y is not a unit vector within 1e-6.
template <typename Scalar>
LreSample<Scalar> make_lre(const VirtualPose<Scalar>& ext, const Vec3<Scalar>& y) {
  if (std::abs(y.norm() - Scalar(1)) > Scalar(1e-6)) {
    throw std::invalid_argument("make_lre: bearing is not a unit vector");
  }
  LreSample<Scalar> s;
  s.pi = projector(ext.q * y);
  s.q = s.pi * ext.xi;
  return s;
}

/// Zero-order-hold discretization of the first-order filters:
/// state <- e^{-alpha dt} state + (1 - e^{-alpha dt}) input. A convex
/// combination, so Phi stays PSD with eigenvalues in [0, 1] for any dt.
template <typename Scalar>
KelreState<Scalar> kelre_step(KelreState<Scalar> s, const LreSample<Scalar>& sample, Scalar dt) {
  const Scalar decay = std::exp(-s.alpha * dt);
  const Scalar gain = -std::expm1(-s.alpha * dt);
  s.qe = decay * s.qe + gain * (sample.pi.transpose() * sample.q);
  s.phi = decay * s.phi + gain * (sample.pi.transpose() * sample.pi);
  return s;
}

/// Y = adj(Phi) qe, Delta = max(det Phi, 0).
template <typename Scalar>
ScalarRegressor<Scalar> drem_mix(const KelreState<Scalar>& s) {
  return {adjugate3(s.phi) * s.qe, std::max(det3(s.phi), Scalar(0))};
}

}  // namespace pebo

#endif  // PEBO_SLAM_DREM_HPP
