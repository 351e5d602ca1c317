#pragma once

#include "geofeas/constraint/graph.hpp"
#include "geofeas/lie/product.hpp"

#include <Eigen/Core>
#include <Eigen/QR>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace geofeas {

/// Constraint values, ambient gradients and left-trivialized gradient rows at one configuration.
struct ConstraintEvaluation {
  Eigen::VectorXd values;
  /// Per constraint: (d phi / d g_i, d phi / d g_j) as matrices in the ambient matrix space.
  std::vector<std::pair<Mat, Mat>> ambient_gradients;
  /// m-bar x (r n); row k holds T*_e L_{g}(d phi_k) in dual-basis coordinates.
  Eigen::MatrixXd rows;
};

/// psi(g) = [[I, -p], [0, 1]] on SE(2).
inline GroupElement psi(const GroupElement& g) {
  if (g.tag() != GroupTag::SE2) throw std::invalid_argument("psi: defined on SE(2) only");
  Mat m = Mat::Identity(3, 3);
  m(0, 2) = -g.matrix()(0, 2);
  m(1, 2) = -g.matrix()(1, 2);
  return GroupElement::from_matrix(GroupTag::SE2, m);
}

namespace detail {

inline GroupTag required_tag(ConstraintKind kind) {
  return kind == ConstraintKind::SE2Frobenius ? GroupTag::SE2 : GroupTag::SE3;
}

inline void check_configuration(const ConstraintGraph& graph, const ProductElement& g) {
  if (g.size() != graph.agents()) {
    throw std::invalid_argument("constraint: configuration has " + std::to_string(g.size()) + " agents, graph has " +
                                std::to_string(graph.agents()));
  }
  if (graph.constraint_count() > 0) require_same_tag(g.tag(), required_tag(graph.kind()), "constraint");
}

// Both kinds are evaluated on the raw matrices so the same formula serves the
// ambient finite-difference oracle (which perturbs off the group).
inline double edge_value(const ConstraintGraph& graph, const EdgeConstraint& e, const Mat& gi, const Mat& gj) {
  if (graph.kind() == ConstraintKind::SE2Frobenius) {
    Mat psi_j = Mat::Identity(3, 3);
    psi_j(0, 2) = -gj(0, 2);
    psi_j(1, 2) = -gj(1, 2);
    return (psi_j * gi).squaredNorm() - (e.distance * e.distance + 3.0);
  }
  const Eigen::Vector3d diff = gi.block<3, 1>(0, 3) - gj.block<3, 1>(0, 3);
  return diff.squaredNorm() - graph.target_squared(e);
}

inline std::pair<Mat, Mat> edge_ambient_gradient(const ConstraintGraph& graph, const Mat& gi, const Mat& gj) {
  const int n = gi.rows();
  if (graph.kind() == ConstraintKind::SE2Frobenius) {
    Mat psi_j = Mat::Identity(3, 3);
    psi_j(0, 2) = -gj(0, 2);
    psi_j(1, 2) = -gj(1, 2);
    // d/dg_i tr(g_i^T psi^T psi g_i) = 2 psi^T psi g_i
    Mat grad_i = 2.0 * psi_j.transpose() * psi_j * gi;
    // psi(g_j) depends on g_j only through its translation entries.
    const Mat x = psi_j * gi;
    Mat grad_j = Mat::Zero(n, n);
    for (int a = 0; a < 2; ++a) {
      // d(psi_j)/d(g_j(a,2)) = -E(a,2); d||X||^2 = 2 <X, dX>, dX = -E(a,2) g_i.
      grad_j(a, 2) = -2.0 * x.row(a).dot(gi.row(2));
    }
    return {grad_i, grad_j};
  }
  const Eigen::Vector3d diff = gi.block<3, 1>(0, 3) - gj.block<3, 1>(0, 3);
  Mat grad_i = Mat::Zero(n, n);
  grad_i.block<3, 1>(0, 3) = 2.0 * diff;
  Mat grad_j = Mat::Zero(n, n);
  grad_j.block<3, 1>(0, 3) = -2.0 * diff;
  return {grad_i, grad_j};
}

}  // namespace detail

/// T*_e L_g applied to an ambient gradient: component s is <G, g B_s>_F.
inline Vec trivialize(const GroupElement& g, const Mat& ambient) {
  const int n = algebra_dim(g.tag());
  Vec row(n);
  for (int s = 0; s < n; ++s) {
    row(s) = ambient.cwiseProduct(g.matrix() * AlgebraElement::basis(g.tag(), s).matrix()).sum();
  }
  return row;
}

/// Phi(g), one entry per edge constraint in graph order.
inline Eigen::VectorXd constraint_value(const ConstraintGraph& graph, const ProductElement& g) {
  detail::check_configuration(graph, g);
  Eigen::VectorXd out(graph.constraint_count());
  for (int k = 0; k < graph.constraint_count(); ++k) {
    const auto& e = graph.edges()[static_cast<std::size_t>(k)];
    out(k) = detail::edge_value(graph, e, g[e.i].matrix(), g[e.j].matrix());
  }
  return out;
}

inline ConstraintEvaluation constraint_gradients(const ConstraintGraph& graph, const ProductElement& g) {
  detail::check_configuration(graph, g);
  const int m = graph.constraint_count();
  const int n = g.empty() ? 0 : algebra_dim(g.tag());
  ConstraintEvaluation ev;
  ev.values = constraint_value(graph, g);
  ev.rows = Eigen::MatrixXd::Zero(m, g.size() * n);
  ev.ambient_gradients.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const auto& e = graph.edges()[static_cast<std::size_t>(k)];
    auto grads = detail::edge_ambient_gradient(graph, g[e.i].matrix(), g[e.j].matrix());
    ev.rows.block(k, e.i * n, 1, n) = trivialize(g[e.i], grads.first).transpose();
    ev.rows.block(k, e.j * n, 1, n) = trivialize(g[e.j], grads.second).transpose();
    ev.ambient_gradients.push_back(std::move(grads));
  }
  return ev;
}

/// dPhi/dt = rows * xi along g' = g xi.
inline Eigen::VectorXd constraint_rate(const ConstraintGraph& graph, const ProductElement& g, const Eigen::VectorXd& xi) {
  return constraint_gradients(graph, g).rows * xi;
}

/// d^2/dt^2 Phi(g exp(t xi)) at t = 0, i.e. the velocity-quadratic part of the
/// constraint acceleration (xi held fixed).
inline Eigen::VectorXd constraint_curvature(const ConstraintGraph& graph, const ProductElement& g,
                                            const Eigen::VectorXd& xi) {
  detail::check_configuration(graph, g);
  const int m = graph.constraint_count();
  Eigen::VectorXd out(m);
  if (m == 0) return out;
  const GroupTag tag = g.tag();
  const int n = algebra_dim(tag);
  const int k_rot = rotation_dim(tag);
  // Both kinds reduce to |p_i - p_j|^2 - c along the curve.
  std::vector<Eigen::VectorXd> vel(static_cast<std::size_t>(g.size()));
  std::vector<Eigen::VectorXd> acc(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) {
    const Mat xh = AlgebraElement(tag, xi.segment(i * n, n)).matrix();
    const Mat gx = g[i].matrix() * xh;
    const Mat gxx = gx * xh;
    vel[static_cast<std::size_t>(i)] = gx.block(0, k_rot, k_rot, 1);
    acc[static_cast<std::size_t>(i)] = gxx.block(0, k_rot, k_rot, 1);
  }
  for (int k = 0; k < m; ++k) {
    const auto& e = graph.edges()[static_cast<std::size_t>(k)];
    const auto ei = static_cast<std::size_t>(e.i);
    const auto ej = static_cast<std::size_t>(e.j);
    const Eigen::VectorXd dp = g[e.i].translation() - g[e.j].translation();
    const Eigen::VectorXd dv = vel[ei] - vel[ej];
    const Eigen::VectorXd da = acc[ei] - acc[ej];
    out(k) = 2.0 * dv.squaredNorm() + 2.0 * dp.dot(da);
  }
  return out;
}

/// Index of the worst-violated constraint and its |phi|, or (-1, 0) when there are none.
inline std::pair<int, double> worst_violation(const Eigen::VectorXd& values) {
  if (values.size() == 0) return {-1, 0.0};
  Eigen::Index idx = 0;
  const double worst = values.cwiseAbs().maxCoeff(&idx);
  return {static_cast<int>(idx), worst};
}

/// | |p_i - p_j| - target distance | per edge (target d for SE(2), r_i + r_j + d for SE(3)).
inline Eigen::VectorXd center_distance_error(const ConstraintGraph& graph, const ProductElement& g) {
  detail::check_configuration(graph, g);
  Eigen::VectorXd out(graph.constraint_count());
  for (int k = 0; k < graph.constraint_count(); ++k) {
    const auto& e = graph.edges()[static_cast<std::size_t>(k)];
    out(k) = std::abs((g[e.i].translation() - g[e.j].translation()).norm() - std::sqrt(graph.target_squared(e)));
  }
  return out;
}

/// Gauss-Newton projection onto Phi = 0 along minimum-norm left-trivialized corrections.
inline ProductElement project_onto_constraints(const ConstraintGraph& graph, ProductElement g, double tol = 1e-12,
                                               int max_iterations = 20) {
  if (graph.constraint_count() == 0) return g;
  const GroupTag tag = g.tag();
  const int n = algebra_dim(tag);
  for (int it = 0; it < max_iterations; ++it) {
    const ConstraintEvaluation ev = constraint_gradients(graph, g);
    if (ev.values.cwiseAbs().maxCoeff() <= tol) break;
    const Eigen::VectorXd delta = -ev.rows.completeOrthogonalDecomposition().solve(ev.values);
    for (int i = 0; i < g.size(); ++i) {
      g[i] = compose(g[i], exp_map(AlgebraElement(tag, delta.segment(i * n, n))));
    }
  }
  return g;
}

}  // namespace geofeas
