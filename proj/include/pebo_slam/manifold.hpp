#ifndef PEBO_SLAM_MANIFOLD_HPP
#define PEBO_SLAM_MANIFOLD_HPP

// Fixed-size SO(3)/SE(3) primitives. Everything is templated on the scalar
// type and accepts Eigen expressions.

#include <Eigen/Dense>

#include <cmath>

#include "pebo_slam/errors.hpp"

namespace pebo {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Mat4 = Eigen::Matrix<Scalar, 4, 4>;

/// Rotation matrices are plain 3x3 matrices; `is_rotation` checks membership.
template <typename Scalar>
using Rotation3 = Mat3<Scalar>;

template <typename Scalar>
struct Twist {
  Vec3<Scalar> omega = Vec3<Scalar>::Zero();  // rad/s, body frame
  Vec3<Scalar> vel = Vec3<Scalar>::Zero();    // m/s, body frame

  static Twist zero() { return {}; }
  bool all_finite() const { return omega.allFinite() && vel.allFinite(); }
};

/// Element of SE(3) stored as (R, x); `matrix()` gives the homogeneous form.
template <typename Scalar>
struct Pose {
  Rotation3<Scalar> rot = Rotation3<Scalar>::Identity();
  Vec3<Scalar> pos = Vec3<Scalar>::Zero();

  static Pose identity() { return {}; }

  Mat4<Scalar> matrix() const {
    Mat4<Scalar> t = Mat4<Scalar>::Identity();
    t.template topLeftCorner<3, 3>() = rot;
    t.template topRightCorner<3, 1>() = pos;
    return t;
  }
};

template <typename Derived>
Mat3<typename Derived::Scalar> hat(const Eigen::MatrixBase<Derived>& a) {
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3);
  using S = typename Derived::Scalar;
  Mat3<S> m;
  m << S(0), -a(2), a(1),
       a(2), S(0), -a(0),
       -a(1), a(0), S(0);
  return m;
}

/// Inverse of `hat` on the skew part of `m`.
template <typename Derived>
Vec3<typename Derived::Scalar> vee(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  return Vec3<S>(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)) / S(2);
}

/// Twist to se(3): [hat(omega) vel; 0 0].
template <typename Scalar>
Mat4<Scalar> wedge6(const Twist<Scalar>& u) {
  Mat4<Scalar> m = Mat4<Scalar>::Zero();
  m.template topLeftCorner<3, 3>() = hat(u.omega);
  m.template topRightCorner<3, 1>() = u.vel;
  return m;
}

template <typename Scalar>
Twist<Scalar> unwedge6(const Mat4<Scalar>& m) {
  return {vee(m.template topLeftCorner<3, 3>()), m.template topRightCorner<3, 1>()};
}

namespace detail {
template <typename Scalar>
constexpr Scalar small_angle() { return Scalar(1e-8); }
}  // namespace detail

/// Rodrigues formula; second-order series below |a| = 1e-8.
template <typename Derived>
Rotation3<typename Derived::Scalar> exp_so3(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  const S theta = a.norm();
  const Mat3<S> k = hat(a);
  if (theta < detail::small_angle<S>()) {
    return Mat3<S>::Identity() + k + S(0.5) * k * k;
  }
  const S a1 = std::sin(theta) / theta;
  const S a2 = (S(1) - std::cos(theta)) / (theta * theta);
  return Mat3<S>::Identity() + a1 * k + a2 * k * k;
}

/// Left Jacobian of SO(3): translational part of the SE(3) exponential.
template <typename Derived>
Mat3<typename Derived::Scalar> left_jacobian_so3(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  const S theta = a.norm();
  const Mat3<S> k = hat(a);
  if (theta < detail::small_angle<S>()) {
    return Mat3<S>::Identity() + S(0.5) * k + k * k / S(6);
  }
  const S t2 = theta * theta;
  const S b1 = (S(1) - std::cos(theta)) / t2;
  const S b2 = (theta - std::sin(theta)) / (t2 * theta);
  return Mat3<S>::Identity() + b1 * k + b2 * k * k;
}

/// exp(wedge6(u) * dt) as a pose; exact for a twist held constant over dt.
template <typename Scalar>
Pose<Scalar> exp_se3(const Twist<Scalar>& u, Scalar dt) {
  const Vec3<Scalar> phi = u.omega * dt;
  return {exp_so3(phi), left_jacobian_so3(phi) * (u.vel * dt)};
}

/// Rotation about the z axis, the attitude parameterization used by the
/// planar test scenarios.
template <typename Scalar>
Rotation3<Scalar> rotz(Scalar angle) {
  return exp_so3(Vec3<Scalar>(Scalar(0), Scalar(0), angle));
}

/// Pi_x = I - x x^T / |x|^2. Throws DegenerateVector for |x| <= 1e-12.
template <typename Derived>
Mat3<typename Derived::Scalar> projector(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  const S n2 = x.squaredNorm();
  if (!(std::sqrt(n2) > S(1e-12))) {
    throw DegenerateVector("projector: vector norm below 1e-12");
  }
  return Mat3<S>::Identity() - (x * x.transpose()) / n2;
}

/// Adjugate by explicit cofactors; well-defined for singular input.
template <typename Derived>
Mat3<typename Derived::Scalar> adjugate3(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  const Vec3<S> c0 = a.col(0);
  const Vec3<S> c1 = a.col(1);
  const Vec3<S> c2 = a.col(2);
  // Rows of adj(A) are the cross products of column pairs.
  Mat3<S> adj;
  adj.row(0) = c1.cross(c2).transpose();
  adj.row(1) = c2.cross(c0).transpose();
  adj.row(2) = c0.cross(c1).transpose();
  return adj;
}

template <typename Derived>
typename Derived::Scalar det3(const Eigen::MatrixBase<Derived>& a) {
  return a.col(0).dot(a.col(1).cross(a.col(2)));
}

template <typename Scalar>
Pose<Scalar> pose_compose(const Pose<Scalar>& a, const Pose<Scalar>& b) {
  return {a.rot * b.rot, a.rot * b.pos + a.pos};
}

template <typename Scalar>
Pose<Scalar> pose_inverse(const Pose<Scalar>& a) {
  const Rotation3<Scalar> rt = a.rot.transpose();
  return {rt, -rt * a.pos};
}

template <typename Derived>
typename Derived::Scalar orthonormality_error(const Eigen::MatrixBase<Derived>& r) {
  using S = typename Derived::Scalar;
  return (r.transpose() * r - Mat3<S>::Identity()).norm();
}

template <typename Derived>
bool is_rotation(const Eigen::MatrixBase<Derived>& r,
                 typename Derived::Scalar tol = typename Derived::Scalar(1e-9)) {
  using S = typename Derived::Scalar;
  return orthonormality_error(r) <= tol && std::abs(det3(r) - S(1)) <= tol;
}

/// Nearest rotation in Frobenius norm (polar factor via SVD).
template <typename Derived>
Rotation3<typename Derived::Scalar> nearest_rotation(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  Eigen::JacobiSVD<Mat3<S>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3<S> u = svd.matrixU();
  const Mat3<S> v = svd.matrixV();
  if ((u * v.transpose()).determinant() < S(0)) {
    u.col(2) = -u.col(2);
  }
  return u * v.transpose();
}

/// Projects back onto SO(3) only when drift exceeds `tol`.
template <typename Scalar>
void reorthonormalize_if_drifted(Rotation3<Scalar>& r, Scalar tol = Scalar(1e-9)) {
  if (orthonormality_error(r) > tol) {
    r = nearest_rotation(r);
  }
}

}  // namespace pebo

#endif  // PEBO_SLAM_MANIFOLD_HPP
