#ifndef PEBO_SLAM_LANDMARK_OBSERVER_HPP
#define PEBO_SLAM_LANDMARK_OBSERVER_HPP

// Mapping observer for one landmark in the virtual frame.
//
//   chi'   = Delta (Y - Delta chi)                     chi(0) = chi0
//   omega' = -Delta^2 omega                            omega(0) = 1
//   zv'    = gamma De (Y + kI (chi - omega chi0) - De zv)
//   De     = Delta + kI (1 - omega)
//
// chi - omega chi0 = (1 - omega) z^v carries the excitation collected so far,
// so De stays bounded away from zero once the bearing has been excited over
// any finite interval, even if Delta itself decays afterwards.

#include <cmath>
#include <optional>

#include "pebo_slam/drem.hpp"
#include "pebo_slam/manifold.hpp"

namespace pebo {

template <typename Scalar>
struct LandmarkEstimatorState {
  Vec3<Scalar> chi = Vec3<Scalar>::Zero();
  Vec3<Scalar> chi0 = Vec3<Scalar>::Zero();
  Scalar omega = Scalar(1);
  Vec3<Scalar> zv_hat = Vec3<Scalar>::Zero();
  Scalar gamma = Scalar(100);
  Scalar k_i = Scalar(20);

  static LandmarkEstimatorState start(const Vec3<Scalar>& chi_init, const Vec3<Scalar>& zv_init,
                                      Scalar gamma, Scalar k_i) {
    return {chi_init, chi_init, Scalar(1), zv_init, gamma, k_i};
  }
};

namespace detail {

/// Exact step of x' = g (b - a x) for constant a >= 0, b over dt, written as
/// x + f (b - a x) with f = (1 - e^{-g a dt}) / a, which tends to g dt as
/// a -> 0. Stable for any dt.
template <typename Scalar, typename Derived>
Vec3<Scalar> relax(const Vec3<Scalar>& x, const Eigen::MatrixBase<Derived>& b, Scalar a, Scalar g,
                   Scalar dt) {
  const Scalar rate = g * a * dt;
  const Scalar f = rate > Scalar(0) ? -std::expm1(-rate) / a : g * dt;
  return x + f * (b - a * x);
}

}  // namespace detail

template <typename Scalar>
Scalar effective_gain(const LandmarkEstimatorState<Scalar>& s, const ScalarRegressor<Scalar>& r) {
  return r.delta + s.k_i * (Scalar(1) - s.omega);
}

/// Y + kI (chi - omega chi0) - De zv_hat. Zero when zv_hat equals z^v on
/// noise-free data.
template <typename Scalar>
Vec3<Scalar> mixed_residual(const LandmarkEstimatorState<Scalar>& s,
                            const ScalarRegressor<Scalar>& r) {
  return r.big_y + s.k_i * (s.chi - s.omega * s.chi0) - effective_gain(s, r) * s.zv_hat;
}

/// All three states advance from the same start-of-step values. omega uses
/// the exact factor exp(-Delta^2 dt); chi and zv_hat use the exact scalar
/// relaxation, so the stiff gamma De^2 never destabilizes the step.
template <typename Scalar>
LandmarkEstimatorState<Scalar> landmark_step(LandmarkEstimatorState<Scalar> s,
                                             const ScalarRegressor<Scalar>& r, Scalar dt) {
  const Scalar delta = std::max(r.delta, Scalar(0));
  const Scalar de = delta + s.k_i * (Scalar(1) - s.omega);
  const Vec3<Scalar> mixed_y = r.big_y + s.k_i * (s.chi - s.omega * s.chi0);

  const Vec3<Scalar> zv_next = detail::relax<Scalar>(s.zv_hat, de * mixed_y, de * de, s.gamma, dt);
  const Vec3<Scalar> chi_next =
      detail::relax<Scalar>(s.chi, delta * r.big_y, delta * delta, Scalar(1), dt);

  s.omega *= std::exp(-delta * delta * dt);
  s.chi = chi_next;
  s.zv_hat = zv_next;
  return s;
}

/// Pure-integral alternative: int Y ds = (int Delta ds) z^v. Diagnostic only;
/// its accumulators grow without bound under persistent excitation.
template <typename Scalar>
struct IntegralRegressor {
  Vec3<Scalar> int_y = Vec3<Scalar>::Zero();
  Scalar int_delta = Scalar(0);

  void step(const ScalarRegressor<Scalar>& r, Scalar dt) {
    int_y += dt * r.big_y;
    int_delta += dt * r.delta;
  }

  std::optional<Vec3<Scalar>> estimate(Scalar min_delta = Scalar(1e-12)) const {
    if (!(int_delta > min_delta)) return std::nullopt;
    return Vec3<Scalar>(int_y / int_delta);
  }
};

}  // namespace pebo

#endif  // PEBO_SLAM_LANDMARK_OBSERVER_HPP
