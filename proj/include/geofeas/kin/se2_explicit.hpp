#pragma once

// Closed-form SE(2) route to the admissible-velocity coefficients, written out
// for the planar distance constraint instead of going through generic
// trivialization and adjoint matrices. Used to cross-check the generic path.

#include "geofeas/constraint/graph.hpp"
#include "geofeas/lie/product.hpp"

#include <Eigen/Core>

#include <stdexcept>

namespace geofeas::se2 {

/// Co-adjoint action Ad*_{(R,p)^-1}(beta, mu) = (R beta, mu - R beta . J p),
/// J = [[0,1],[-1,0]]; coordinates are (translational beta, rotational mu).
inline Eigen::Vector3d coadjoint_inverse(const Eigen::Matrix2d& R, const Eigen::Vector2d& p, const Eigen::Vector3d& row) {
  Eigen::Matrix2d J;
  J << 0.0, 1.0, -1.0, 0.0;
  const Eigen::Vector2d Rbeta = R * row.head<2>();
  return {Rbeta.x(), Rbeta.y(), row(2) - Rbeta.dot(J * p)};
}

/// Left-trivialized row block of phi_ij for the agent at (R, p) whose partner
/// sits at q: translational part 2 R^T (p - q), no rotational part.
inline Eigen::Vector3d trivialized_block(const Eigen::Matrix2d& R, const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
  const Eigen::Vector2d beta = 2.0 * R.transpose() * (p - q);
  return {beta.x(), beta.y(), 0.0};
}

/// Coefficient matrix A(g) for an SE(2) Frobenius-distance graph.
inline Eigen::MatrixXd explicit_coefficients(const ConstraintGraph& graph, const ProductElement& g) {
  if (graph.kind() != ConstraintKind::SE2Frobenius || g.tag() != GroupTag::SE2) {
    throw std::invalid_argument("se2::explicit_coefficients: needs an SE(2) Frobenius graph");
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(graph.constraint_count(), 3 * g.size());
  for (int k = 0; k < graph.constraint_count(); ++k) {
    const auto& e = graph.edges()[static_cast<std::size_t>(k)];
    const Eigen::Matrix2d Ri = g[e.i].matrix().topLeftCorner<2, 2>();
    const Eigen::Matrix2d Rj = g[e.j].matrix().topLeftCorner<2, 2>();
    const Eigen::Vector2d pi = g[e.i].matrix().block<2, 1>(0, 2);
    const Eigen::Vector2d pj = g[e.j].matrix().block<2, 1>(0, 2);
    A.block<1, 3>(k, 3 * e.i) = coadjoint_inverse(Ri, pi, trivialized_block(Ri, pi, pj)).transpose();
    A.block<1, 3>(k, 3 * e.j) = coadjoint_inverse(Rj, pj, trivialized_block(Rj, pj, pi)).transpose();
  }
  return A;
}

}  // namespace geofeas::se2
