#ifndef PEBO_SLAM_TESTS_TEST_SUPPORT_HPP
#define PEBO_SLAM_TESTS_TEST_SUPPORT_HPP

#include <random>

#include "pebo_slam/manifold.hpp"

namespace pebo::testing {

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;

inline Vec3d random_vec(std::mt19937_64& rng, double half_width) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  return {u(rng), u(rng), u(rng)};
}

/// Uniform on SO(3) via a normalized Gaussian quaternion.
inline Mat3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Matrix exponential of a 3x3 matrix by its truncated power series.
inline Mat3d series_exp(const Mat3d& a, int terms = 20) {
  Mat3d sum = Mat3d::Identity();
  Mat3d term = Mat3d::Identity();
  for (int k = 1; k < terms; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

/// Cofactor expansion, written out independently of adjugate3.
inline Mat3d cofactor_adjugate(const Mat3d& a) {
  Mat3d c;
  for (int r = 0; r < 3; ++r) {
    for (int col = 0; col < 3; ++col) {
      const int r0 = (r + 1) % 3, r1 = (r + 2) % 3;
      const int c0 = (col + 1) % 3, c1 = (col + 2) % 3;
      c(r, col) = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
    }
  }
  return c.transpose();
}

}  // namespace pebo::testing

#endif  // PEBO_SLAM_TESTS_TEST_SUPPORT_HPP
