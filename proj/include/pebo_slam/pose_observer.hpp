#ifndef PEBO_SLAM_POSE_OBSERVER_HPP
#define PEBO_SLAM_POSE_OBSERVER_HPP

// Localization from the virtual-frame landmark estimates, with the initial
// pose X(0) = T(R_star, x_star) fixing the inertial frame.
//
// Bar filters (j < n_l), integrated on [0, T_star] and frozen afterwards:
//   ybar'   = Pi_{Q y_j} (xi - xi(0) + Q(0) R_star^T x_star)
//   phibar' = Pi_{Q y_j} Q(0) R_star^T
// give ybar_j = phibar_j z_j, solved online by
//   zbar'   = rho phibar^T (ybar - phibar zbar).
// Attitude and position:
//   Qc_hat' = -(w_vis)_x Qc_hat,  w_vis = sum_j k_j rv_hat_j x (Qc_hat rbar_j)
//   x_hat'  = R_hat v + sum_j sigma_j (zbar_j - x_hat - Qc_hat^T (zv_hat_j - xi))

#include <span>
#include <stdexcept>
#include <vector>

#include "pebo_slam/extension.hpp"
#include "pebo_slam/manifold.hpp"

namespace pebo {

template <typename Scalar>
struct BarFilter {
  Vec3<Scalar> zbar = Vec3<Scalar>::Zero();
  Vec3<Scalar> ybar = Vec3<Scalar>::Zero();
  Mat3<Scalar> phibar = Mat3<Scalar>::Zero();
  Scalar rho = Scalar(1);
  bool weak_excitation = false;  // det(phibar) < 1e-9 when frozen
};

template <typename Scalar>
struct BarFilterBank {
  std::vector<BarFilter<Scalar>> filters;
  Scalar t_star = Scalar(12);
  Rotation3<Scalar> qc_anchor = Rotation3<Scalar>::Identity();  // Q(0) R_star^T
  Vec3<Scalar> offset = Vec3<Scalar>::Zero();  // -xi(0) + Q(0) R_star^T x_star
  bool frozen = false;

  static BarFilterBank create(std::size_t n_localization, std::span<const Scalar> rho,
                              Scalar t_star, const VirtualPose<Scalar>& ext,
                              const Pose<Scalar>& x_star) {
    if (rho.size() != n_localization) {
      throw std::invalid_argument("bar filter bank: one rho per localization landmark");
    }
    BarFilterBank bank;
    bank.filters.resize(n_localization);
    for (std::size_t j = 0; j < n_localization; ++j) bank.filters[j].rho = rho[j];
    bank.t_star = t_star;
    bank.qc_anchor = ext.q0 * x_star.rot.transpose();
    bank.offset = -ext.xi0 + bank.qc_anchor * x_star.pos;
    return bank;
  }
};

template <typename Scalar>
struct PoseEstimate {
  Rotation3<Scalar> qc_hat = Rotation3<Scalar>::Identity();
  Vec3<Scalar> x_hat = Vec3<Scalar>::Zero();
  std::vector<Scalar> k;      // attitude gains, one per consecutive pair
  std::vector<Scalar> sigma;  // position gains, one per localization landmark

  Rotation3<Scalar> r_hat(const VirtualPose<Scalar>& ext) const {
    return qc_hat.transpose() * ext.q;
  }
};

namespace detail {

/// Exact step of z' = b - A z for symmetric PSD A held constant over dt.
template <typename Scalar>
Vec3<Scalar> relax_linear(const Vec3<Scalar>& z, const Mat3<Scalar>& a, const Vec3<Scalar>& b,
                          Scalar dt) {
  Eigen::SelfAdjointEigenSolver<Mat3<Scalar>> es(a);
  const Mat3<Scalar>& v = es.eigenvectors();
  Vec3<Scalar> f;
  for (int k = 0; k < 3; ++k) {
    const Scalar lambda = std::max(es.eigenvalues()(k), Scalar(0));
    f(k) = lambda * dt > Scalar(0) ? -std::expm1(-lambda * dt) / lambda : dt;
  }
  return z + v * f.asDiagonal() * v.transpose() * (b - a * z);
}

}  // namespace detail

/// `t` is the time at the end of the step; samples with t <= T_star are
/// accumulated into ybar/phibar, later ones are ignored.
template <typename Scalar>
BarFilterBank<Scalar> bar_filter_step(BarFilterBank<Scalar> bank, const VirtualPose<Scalar>& ext,
                                      std::span<const Vec3<Scalar>> y, Scalar t, Scalar dt) {
  if (y.size() < bank.filters.size()) {
    throw std::invalid_argument("bar_filter_step: missing localization bearings");
  }
  const bool accumulate = t <= bank.t_star + Scalar(1e-9) * std::max(Scalar(1), bank.t_star);
  if (!accumulate && !bank.frozen) {
    bank.frozen = true;
    for (auto& f : bank.filters) f.weak_excitation = det3(f.phibar) < Scalar(1e-9);
  }
  for (std::size_t j = 0; j < bank.filters.size(); ++j) {
    auto& f = bank.filters[j];
    if (accumulate) {
      const Mat3<Scalar> pi = projector(ext.q * y[j]);
      f.ybar += dt * (pi * (ext.xi + bank.offset));
      f.phibar += dt * (pi * bank.qc_anchor);
    }
    const Mat3<Scalar> a = f.rho * f.phibar.transpose() * f.phibar;
    const Vec3<Scalar> b = f.rho * f.phibar.transpose() * f.ybar;
    f.zbar = detail::relax_linear<Scalar>(f.zbar, a, b, dt);
  }
  return bank;
}

/// w_vis for the current estimates; rv_hat_j = zv_hat_{j+1} - zv_hat_j and
/// rbar_j = zbar_{j+1} - zbar_j.
template <typename Scalar>
Vec3<Scalar> attitude_innovation(const PoseEstimate<Scalar>& p, const BarFilterBank<Scalar>& bank,
                                 std::span<const Vec3<Scalar>> zv_hats) {
  const std::size_t n_l = bank.filters.size();
  if (n_l < 3 || zv_hats.size() < n_l || p.k.size() + 1 < n_l) {
    throw std::invalid_argument("attitude_innovation: need >= 3 localization landmarks");
  }
  Vec3<Scalar> w = Vec3<Scalar>::Zero();
  for (std::size_t j = 0; j + 1 < n_l; ++j) {
    const Vec3<Scalar> rv_hat = zv_hats[j + 1] - zv_hats[j];
    const Vec3<Scalar> rbar = bank.filters[j + 1].zbar - bank.filters[j].zbar;
    w += p.k[j] * rv_hat.cross(p.qc_hat * rbar);
  }
  return w;
}

/// Qc_hat <- exp(-w_vis dt) Qc_hat, which stays on SO(3).
template <typename Scalar>
PoseEstimate<Scalar> attitude_step(PoseEstimate<Scalar> p, const BarFilterBank<Scalar>& bank,
                                   std::span<const Vec3<Scalar>> zv_hats,
                                   const VirtualPose<Scalar>& /*ext*/, Scalar dt) {
  const Vec3<Scalar> w = attitude_innovation(p, bank, zv_hats);
  p.qc_hat = exp_so3(Vec3<Scalar>(-w * dt)) * p.qc_hat;
  reorthonormalize_if_drifted(p.qc_hat);
  return p;
}

/// Explicit step of the x_hat equation.
template <typename Scalar>
PoseEstimate<Scalar> position_step(PoseEstimate<Scalar> p, const BarFilterBank<Scalar>& bank,
                                   std::span<const Vec3<Scalar>> zv_hats,
                                   const VirtualPose<Scalar>& ext, const Twist<Scalar>& u,
                                   Scalar dt) {
  const std::size_t n_l = bank.filters.size();
  if (zv_hats.size() < n_l || p.sigma.size() < n_l) {
    throw std::invalid_argument("position_step: missing gains or landmark estimates");
  }
  Vec3<Scalar> rate = p.r_hat(ext) * u.vel;
  for (std::size_t j = 0; j < n_l; ++j) {
    const Vec3<Scalar> innovation =
        bank.filters[j].zbar - p.x_hat - p.qc_hat.transpose() * (zv_hats[j] - ext.xi);
    rate += p.sigma[j] * innovation;
  }
  p.x_hat += dt * rate;
  return p;
}

/// z_hat_i = Qc_hat^T (zv_hat_i - xi) + x_hat.
template <typename Scalar>
std::vector<Vec3<Scalar>> inertial_landmarks(const PoseEstimate<Scalar>& p,
                                             std::span<const Vec3<Scalar>> zv_hats,
                                             const VirtualPose<Scalar>& ext) {
  std::vector<Vec3<Scalar>> out;
  out.reserve(zv_hats.size());
  for (const auto& zv : zv_hats) {
    out.push_back(p.qc_hat.transpose() * (zv - ext.xi) + p.x_hat);
  }
  return out;
}

}  // namespace pebo

#endif  // PEBO_SLAM_POSE_OBSERVER_HPP
