#ifndef PEBO_SLAM_EVAL_ORACLES_HPP
#define PEBO_SLAM_EVAL_ORACLES_HPP

// Ground-truth oracles. These read the true pose and are meant for tests and
// error metrics only; observer code must not include this header.

#include "pebo_slam/extension.hpp"
#include "pebo_slam/manifold.hpp"

namespace pebo::eval {

/// X_c = X_e X^{-1}.
template <typename Scalar>
Pose<Scalar> oracle_xc(const Pose<Scalar>& x_true, const VirtualPose<Scalar>& x_ext) {
  return pose_compose(x_ext.pose(), pose_inverse(x_true));
}

/// z^v = xi + Q R^T (z - x).
template <typename Scalar>
Vec3<Scalar> oracle_zv(const Pose<Scalar>& x_true, const VirtualPose<Scalar>& x_ext,
                       const Vec3<Scalar>& z) {
  return x_ext.xi + x_ext.q * (x_true.rot.transpose() * (z - x_true.pos));
}

/// Bearing of z^v seen from the virtual robot, expressed in its own frame.
template <typename Scalar>
Vec3<Scalar> virtual_bearing(const VirtualPose<Scalar>& x_ext, const Vec3<Scalar>& zv) {
  return x_ext.q.transpose() * (zv - x_ext.xi).normalized();
}

/// z^B = R^T (z - x).
template <typename Scalar>
Vec3<Scalar> body_landmark(const Pose<Scalar>& x_true, const Vec3<Scalar>& z) {
  return x_true.rot.transpose() * (z - x_true.pos);
}

}  // namespace pebo::eval

#endif  // PEBO_SLAM_EVAL_ORACLES_HPP
