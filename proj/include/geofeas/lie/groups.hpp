#pragma once

// Closed-form kernels for SO(3), SE(2) and SE(3).
//
// Coordinate conventions:
//   so(3): w = (w1, w2, w3), hat(w) is the usual skew matrix.
//   se(2): (v1, v2, w) against the basis
//            e1 = E(0,2), e2 = E(1,2), e3 = [[0,-1,0],[1,0,0],[0,0,0]].
//   se(3): (nu, Omega), hat = [[hat(Omega), nu], [0, 0]].

#include "geofeas/lie/group_tag.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>

namespace geofeas {

/// Below this algebra norm the exponentials switch to truncated series.
inline constexpr double kSeriesThreshold = 1e-8;

inline Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

inline Eigen::Vector3d unskew(const Eigen::Matrix3d& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

struct SO3Kernel {
  static constexpr GroupTag tag = GroupTag::SO3;
  static constexpr int dof = 3;
  static constexpr int dim = 3;
  using Coords = Eigen::Matrix<double, 3, 1>;
  using MatrixG = Eigen::Matrix3d;
  using AdMatrix = Eigen::Matrix3d;

  static MatrixG hat(const Coords& w) { return skew(w); }
  static Coords vee(const MatrixG& m) { return unskew(m); }

  static MatrixG exp(const Coords& w) {
    const double theta = w.norm();
    const Eigen::Matrix3d W = skew(w);
    if (theta < kSeriesThreshold) {
      return Eigen::Matrix3d::Identity() + W + 0.5 * W * W;
    }
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / (theta * theta);
    return Eigen::Matrix3d::Identity() + a * W + b * W * W;
  }

  /// Ad_R w = R w.
  static AdMatrix adjoint(const MatrixG& R) { return R; }

  /// ad_w u = w x u.
  static AdMatrix ad(const Coords& w) { return skew(w); }
};

struct SE2Kernel {
  static constexpr GroupTag tag = GroupTag::SE2;
  static constexpr int dof = 3;
  static constexpr int dim = 3;
  using Coords = Eigen::Matrix<double, 3, 1>;
  using MatrixG = Eigen::Matrix3d;
  using AdMatrix = Eigen::Matrix3d;

  /// Planar quarter-turn [[0,-1],[1,0]]; the rotational generator of se(2).
  static Eigen::Matrix2d quarter_turn() {
    Eigen::Matrix2d j;
    j << 0.0, -1.0, 1.0, 0.0;
    return j;
  }

  static MatrixG hat(const Coords& c) {
    MatrixG m = MatrixG::Zero();
    m.topLeftCorner<2, 2>() = c(2) * quarter_turn();
    m(0, 2) = c(0);
    m(1, 2) = c(1);
    return m;
  }

  static Coords vee(const MatrixG& m) { return {m(0, 2), m(1, 2), m(1, 0)}; }

  static MatrixG exp(const Coords& c) {
    const double w = c(2);
    const Eigen::Vector2d v(c(0), c(1));
    const Eigen::Matrix2d J = quarter_turn();
    Eigen::Matrix2d R;
    R << std::cos(w), -std::sin(w), std::sin(w), std::cos(w);
    Eigen::Matrix2d V;
    if (std::abs(w) < kSeriesThreshold) {
      V = Eigen::Matrix2d::Identity() + 0.5 * w * J;
    } else {
      V = (std::sin(w) / w) * Eigen::Matrix2d::Identity() + ((1.0 - std::cos(w)) / w) * J;
    }
    MatrixG g = MatrixG::Identity();
    g.topLeftCorner<2, 2>() = R;
    g.topRightCorner<2, 1>() = V * v;
    return g;
  }

  /// Ad_(R,p) (v, w) = (R v - w J p, w).
  static AdMatrix adjoint(const MatrixG& g) {
    AdMatrix a = AdMatrix::Zero();
    a.topLeftCorner<2, 2>() = g.topLeftCorner<2, 2>();
    a(0, 2) = g(1, 2);
    a(1, 2) = -g(0, 2);
    a(2, 2) = 1.0;
    return a;
  }

  /// ad_(v,w) (u, s) = (w J u - s J v, 0).
  static AdMatrix ad(const Coords& c) {
    AdMatrix a = AdMatrix::Zero();
    a.topLeftCorner<2, 2>() = c(2) * quarter_turn();
    a(0, 2) = c(1);
    a(1, 2) = -c(0);
    return a;
  }
};

struct SE3Kernel {
  static constexpr GroupTag tag = GroupTag::SE3;
  static constexpr int dof = 6;
  static constexpr int dim = 4;
  using Coords = Eigen::Matrix<double, 6, 1>;
  using MatrixG = Eigen::Matrix4d;
  using AdMatrix = Eigen::Matrix<double, 6, 6>;

  static MatrixG hat(const Coords& c) {
    MatrixG m = MatrixG::Zero();
    m.topLeftCorner<3, 3>() = skew(c.tail<3>());
    m.topRightCorner<3, 1>() = c.head<3>();
    return m;
  }

  static Coords vee(const MatrixG& m) {
    Coords c;
    c.head<3>() = m.topRightCorner<3, 1>();
    c.tail<3>() = unskew(m.topLeftCorner<3, 3>());
    return c;
  }

  static MatrixG exp(const Coords& c) {
    const Eigen::Vector3d nu = c.head<3>();
    const Eigen::Vector3d w = c.tail<3>();
    const double theta = w.norm();
    const Eigen::Matrix3d W = skew(w);
    Eigen::Matrix3d V;
    if (theta < kSeriesThreshold) {
      V = Eigen::Matrix3d::Identity() + 0.5 * W + (1.0 / 6.0) * W * W;
    } else {
      const double t2 = theta * theta;
      V = Eigen::Matrix3d::Identity() + ((1.0 - std::cos(theta)) / t2) * W +
          ((theta - std::sin(theta)) / (t2 * theta)) * W * W;
    }
    MatrixG g = MatrixG::Identity();
    g.topLeftCorner<3, 3>() = SO3Kernel::exp(w);
    g.topRightCorner<3, 1>() = V * nu;
    return g;
  }

  /// Ad_(R,b) (nu, Omega) = (R nu + b x R Omega, R Omega).
  static AdMatrix adjoint(const MatrixG& g) {
    const Eigen::Matrix3d R = g.topLeftCorner<3, 3>();
    const Eigen::Vector3d b = g.topRightCorner<3, 1>();
    AdMatrix a = AdMatrix::Zero();
    a.topLeftCorner<3, 3>() = R;
    a.topRightCorner<3, 3>() = skew(b) * R;
    a.bottomRightCorner<3, 3>() = R;
    return a;
  }

  /// ad_(nu,Omega) (u, s) = (Omega x u - s x nu, Omega x s).
  static AdMatrix ad(const Coords& c) {
    AdMatrix a = AdMatrix::Zero();
    a.topLeftCorner<3, 3>() = skew(c.tail<3>());
    a.topRightCorner<3, 3>() = skew(c.head<3>());
    a.bottomRightCorner<3, 3>() = skew(c.tail<3>());
    return a;
  }
};

/// Calls f with the kernel type matching tag.
template <typename F>
decltype(auto) visit_kernel(GroupTag tag, F&& f) {
  switch (tag) {
    case GroupTag::SO3: return f(SO3Kernel{});
    case GroupTag::SE2: return f(SE2Kernel{});
    case GroupTag::SE3: break;
  }
  return f(SE3Kernel{});
}

}  // namespace geofeas
