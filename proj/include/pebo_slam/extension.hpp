#ifndef PEBO_SLAM_EXTENSION_HPP
#define PEBO_SLAM_EXTENSION_HPP

// Open-loop "virtual robot" X_e = T(Q, xi) driven by the measured twist.
// X_e X^{-1} stays constant along trajectories, so the landmark coordinates
// seen from the virtual frame are constants to be identified.

#include "pebo_slam/manifold.hpp"

namespace pebo {

template <typename Scalar>
struct VirtualPose {
  Rotation3<Scalar> q = Rotation3<Scalar>::Identity();
  Vec3<Scalar> xi = Vec3<Scalar>::Zero();
  Rotation3<Scalar> q0 = Rotation3<Scalar>::Identity();
  Vec3<Scalar> xi0 = Vec3<Scalar>::Zero();

  static VirtualPose start_at(const Rotation3<Scalar>& q_init, const Vec3<Scalar>& xi_init) {
    return {q_init, xi_init, q_init, xi_init};
  }

  Pose<Scalar> pose() const { return {q, xi}; }
};

/// Same constant-twist update as the ground-truth integrator.
template <typename Scalar>
VirtualPose<Scalar> step_extension(VirtualPose<Scalar> v, const Twist<Scalar>& u, Scalar dt) {
  const Pose<Scalar> next = pose_compose(v.pose(), exp_se3(u, dt));
  v.q = next.rot;
  v.xi = next.pos;
  reorthonormalize_if_drifted(v.q);
  return v;
}

}  // namespace pebo

#endif  // PEBO_SLAM_EXTENSION_HPP
