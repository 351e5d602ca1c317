#pragma once

#include "geofeas/lie/group_tag.hpp"
#include "geofeas/lie/groups.hpp"

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace geofeas {

/// Rotation blocks within this distance of SO(n) are accepted unchanged.
inline constexpr double kOrthoTolerance = 1e-10;
/// Rotation blocks beyond kOrthoTolerance but within this are re-projected; worse input is rejected.
inline constexpr double kProjectTolerance = 1e-6;

/// Nearest rotation in the Frobenius sense (polar factor), with det fixed to +1.
template <typename Derived>
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3> nearest_rotation(const Eigen::MatrixBase<Derived>& m) {
  using RotMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
  Eigen::JacobiSVD<RotMat> svd(RotMat(m), Eigen::ComputeFullU | Eigen::ComputeFullV);
  RotMat U = svd.matrixU();
  const RotMat V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) U.col(U.cols() - 1) *= -1.0;
  return U * V.transpose();
}

/// max(||R^T R - I||_F, |det R - 1|).
template <typename Derived>
double orthogonality_error(const Eigen::MatrixBase<Derived>& R) {
  const auto n = R.rows();
  const double ortho = (R.transpose() * R - Eigen::MatrixXd::Identity(n, n)).norm();
  return std::max(ortho, std::abs(R.determinant() - 1.0));
}

/// A configuration on SO(3), SE(2) or SE(3) in homogeneous matrix form.
class GroupElement {
 public:
  GroupElement() : GroupElement(GroupTag::SE3) {}

  static GroupElement identity(GroupTag tag) { return GroupElement(tag); }

  /// Validates m; small rotation defects (<= 1e-6) are polar-projected, larger ones throw.
  static GroupElement from_matrix(GroupTag tag, const Mat& m) { return GroupElement(tag, m, kProjectTolerance); }

  /// Always re-projects the rotation block; used after integrator updates that leave the group.
  static GroupElement projected(GroupTag tag, const Mat& m) {
    return GroupElement(tag, m, std::numeric_limits<double>::infinity());
  }

  static GroupElement so3(const Eigen::Matrix3d& R) { return from_matrix(GroupTag::SO3, R); }

  static GroupElement se3(const Eigen::Matrix3d& R, const Eigen::Vector3d& b) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = R;
    m.topRightCorner<3, 1>() = b;
    return from_matrix(GroupTag::SE3, m);
  }

  /// Planar pose (x, y, theta).
  static GroupElement se2(double x, double y, double theta) {
    Eigen::Matrix3d m;
    m << std::cos(theta), -std::sin(theta), x,
         std::sin(theta), std::cos(theta), y,
         0.0, 0.0, 1.0;
    GroupElement g(GroupTag::SE2);
    g.matrix_ = m;
    return g;
  }

  GroupTag tag() const { return tag_; }
  const Mat& matrix() const { return matrix_; }

  Mat rotation() const {
    const int k = rotation_dim(tag_);
    return matrix_.topLeftCorner(k, k);
  }

  /// Translation column (empty for SO3).
  Vec translation() const {
    if (!has_translation(tag_)) return Vec(0);
    const int k = rotation_dim(tag_);
    return matrix_.block(0, k, k, 1);
  }

  double orthogonality_defect() const { return orthogonality_error(rotation()); }

 private:
  explicit GroupElement(GroupTag tag) : tag_(tag), matrix_(Mat::Identity(matrix_dim(tag), matrix_dim(tag))) {}

  GroupElement(GroupTag tag, const Mat& m, double project_tol) : tag_(tag) {
    const int n = matrix_dim(tag);
    if (m.rows() != n || m.cols() != n) {
      std::ostringstream os;
      os << "GroupElement: expected " << n << "x" << n << " matrix for " << to_string(tag) << ", got " << m.rows()
         << "x" << m.cols();
      throw std::invalid_argument(os.str());
    }
    if (!m.allFinite()) throw std::invalid_argument("GroupElement: non-finite entries");
    matrix_ = m;
    if (has_translation(tag)) {
      const double bottom_err =
          (m.row(n - 1) - Eigen::RowVectorXd::Unit(n, n - 1)).cwiseAbs().maxCoeff();
      if (bottom_err > kProjectTolerance) {
        throw std::invalid_argument("GroupElement: homogeneous bottom row is not (0,...,0,1)");
      }
      matrix_.row(n - 1).setZero();
      matrix_(n - 1, n - 1) = 1.0;
    }
    const int k = rotation_dim(tag);
    const double err = orthogonality_error(matrix_.topLeftCorner(k, k));
    if (err > kOrthoTolerance) {
      if (err > project_tol) {
        std::ostringstream os;
        os << "GroupElement: rotation block is not orthonormal (defect " << err << ")";
        throw std::invalid_argument(os.str());
      }
      matrix_.topLeftCorner(k, k) = nearest_rotation(matrix_.topLeftCorner(k, k));
    }
  }

  GroupTag tag_;
  Mat matrix_;
};

/// Element of the Lie algebra stored as coordinates against the fixed basis.
class AlgebraElement {
 public:
  AlgebraElement() = default;
  AlgebraElement(GroupTag tag, Vec coords) : tag_(tag), coords_(std::move(coords)) {
    if (coords_.size() != algebra_dim(tag)) {
      std::ostringstream os;
      os << "AlgebraElement: " << to_string(tag) << " needs " << algebra_dim(tag) << " coordinates, got "
         << coords_.size();
      throw std::invalid_argument(os.str());
    }
  }

  static AlgebraElement zero(GroupTag tag) { return {tag, Vec::Zero(algebra_dim(tag))}; }
  static AlgebraElement basis(GroupTag tag, int s) { return {tag, Vec::Unit(algebra_dim(tag), s)}; }

  GroupTag tag() const { return tag_; }
  const Vec& coords() const { return coords_; }

  /// Matrix form, sum_s coords_s * basis_s.
  Mat matrix() const {
    return visit_kernel(tag_, [&](auto k) -> Mat {
      using K = decltype(k);
      return K::hat(typename K::Coords(coords_));
    });
  }

 private:
  GroupTag tag_ = GroupTag::SE3;
  Vec coords_ = Vec::Zero(6);
};

/// Element of the dual algebra: components against the dual basis, so pairing is a dot product.
class CoAlgebraElement {
 public:
  CoAlgebraElement() = default;
  CoAlgebraElement(GroupTag tag, Vec coords) : tag_(tag), coords_(std::move(coords)) {
    if (coords_.size() != algebra_dim(tag)) {
      throw std::invalid_argument("CoAlgebraElement: coordinate count does not match group");
    }
  }

  static CoAlgebraElement zero(GroupTag tag) { return {tag, Vec::Zero(algebra_dim(tag))}; }
  static CoAlgebraElement dual_basis(GroupTag tag, int k) { return {tag, Vec::Unit(algebra_dim(tag), k)}; }

  GroupTag tag() const { return tag_; }
  const Vec& coords() const { return coords_; }

  /// Matrix view under the trace pairing <alpha, xi> = tr(alpha xi).
  ///
  /// Each basis matrix B_s is Frobenius-orthogonal to the others, so the dual
  /// matrix is B_s^T / ||B_s||_F^2; for se(2) this reproduces e^1 = E(2,0),
  /// e^2 = E(2,1), e^3 = [[0,1/2],[-1/2,0]].
  Mat matrix() const {
    const int n = matrix_dim(tag_);
    Mat out = Mat::Zero(n, n);
    for (int s = 0; s < coords_.size(); ++s) {
      const Mat b = AlgebraElement::basis(tag_, s).matrix();
      out += coords_(s) * b.transpose() / b.squaredNorm();
    }
    return out;
  }

 private:
  GroupTag tag_ = GroupTag::SE3;
  Vec coords_ = Vec::Zero(6);
};

// ---------------------------------------------------------------------------
// Operations

inline AlgebraElement hat(const Vec& v, GroupTag tag) { return {tag, v}; }

inline Vec vee(const AlgebraElement& a) { return a.coords(); }

/// Reads algebra coordinates back from a matrix in the algebra.
inline AlgebraElement from_algebra_matrix(GroupTag tag, const Mat& m) {
  if (m.rows() != matrix_dim(tag) || m.cols() != matrix_dim(tag)) {
    throw std::invalid_argument("from_algebra_matrix: wrong matrix size");
  }
  return visit_kernel(tag, [&](auto k) {
    using K = decltype(k);
    return AlgebraElement(tag, Vec(K::vee(typename K::MatrixG(m))));
  });
}

inline GroupElement compose(const GroupElement& g, const GroupElement& h) {
  require_same_tag(g.tag(), h.tag(), "compose");
  return GroupElement::projected(g.tag(), g.matrix() * h.matrix());
}

inline GroupElement inverse(const GroupElement& g) {
  const GroupTag tag = g.tag();
  const int n = matrix_dim(tag);
  const int k = rotation_dim(tag);
  Mat inv = Mat::Identity(n, n);
  const Mat Rt = g.rotation().transpose();
  inv.topLeftCorner(k, k) = Rt;
  if (has_translation(tag)) inv.block(0, k, k, 1) = -Rt * g.translation();
  return GroupElement::projected(tag, inv);
}

inline GroupElement identity(GroupTag tag) { return GroupElement::identity(tag); }

/// Left translation L_g(h) = g h.
inline GroupElement left_translate(const GroupElement& g, const GroupElement& h) { return compose(g, h); }

inline GroupElement exp_map(const AlgebraElement& xi) {
  return visit_kernel(xi.tag(), [&](auto k) {
    using K = decltype(k);
    return GroupElement::projected(xi.tag(), Mat(K::exp(typename K::Coords(xi.coords()))));
  });
}

/// Matrix of Ad_g in the fixed algebra basis.
inline AlgMat adjoint_matrix(const GroupElement& g) {
  return visit_kernel(g.tag(), [&](auto k) {
    using K = decltype(k);
    return AlgMat(K::adjoint(typename K::MatrixG(g.matrix())));
  });
}

/// Matrix of ad_xi in the fixed algebra basis.
inline AlgMat ad_matrix(const AlgebraElement& xi) {
  return visit_kernel(xi.tag(), [&](auto k) {
    using K = decltype(k);
    return AlgMat(K::ad(typename K::Coords(xi.coords())));
  });
}

inline double pairing(const CoAlgebraElement& mu, const AlgebraElement& xi) {
  require_same_tag(mu.tag(), xi.tag(), "pairing");
  return mu.coords().dot(xi.coords());
}

/// tr(alpha xi) on matrix forms; agrees with pairing() on dual-basis coordinates.
inline double trace_pairing(const Mat& alpha, const Mat& xi) { return (alpha * xi).trace(); }

inline AlgebraElement Ad(const GroupElement& g, const AlgebraElement& xi) {
  require_same_tag(g.tag(), xi.tag(), "Ad");
  return {g.tag(), adjoint_matrix(g) * xi.coords()};
}

inline AlgebraElement ad(const AlgebraElement& xi, const AlgebraElement& eta) {
  require_same_tag(xi.tag(), eta.tag(), "ad");
  return {xi.tag(), ad_matrix(xi) * eta.coords()};
}

/// Dual of Ad: <coAd(g, mu), xi> = <mu, Ad(g, xi)>.
inline CoAlgebraElement coAd(const GroupElement& g, const CoAlgebraElement& mu) {
  require_same_tag(g.tag(), mu.tag(), "coAd");
  return {g.tag(), adjoint_matrix(g).transpose() * mu.coords()};
}

/// Dual of ad: <coad(xi, mu), eta> = <mu, ad(xi, eta)>.
inline CoAlgebraElement coad(const AlgebraElement& xi, const CoAlgebraElement& mu) {
  require_same_tag(xi.tag(), mu.tag(), "coad");
  return {xi.tag(), ad_matrix(xi).transpose() * mu.coords()};
}

}  // namespace geofeas
