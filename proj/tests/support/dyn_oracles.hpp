#pragma once

#include "geofeas/auv/auv.hpp"
#include "geofeas/sim/integrators.hpp"
#include "support/oracles.hpp"

namespace geofeas::oracle {

/// Coordinates of ad*_xi mu from matrix commutators: (ad*_xi mu)_s = <mu, vee([xi, B_s])>.
inline Eigen::VectorXd coad_oracle(GroupTag tag, const Eigen::VectorXd& xi, const Eigen::VectorXd& mu) {
  const int n = algebra_dim(tag);
  const Mat x = hat_oracle(tag, xi);
  Eigen::VectorXd out(n);
  for (int s = 0; s < n; ++s) {
    const Mat b = basis_matrix(tag, s);
    out(s) = mu.dot(vee_oracle(tag, x * b - b * x));
  }
  return out;
}

inline Eigen::MatrixXd random_spd(Rng& rng, int n, double floor = 0.5) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  }
  return a * a.transpose() + floor * Eigen::MatrixXd::Identity(n, n);
}

/// xi projected onto the kernel of the constraint rows at g.
inline Eigen::VectorXd tangent_velocity(const ConstraintGraph& graph, const ProductElement& g, const Eigen::VectorXd& xi) {
  if (graph.constraint_count() == 0) return xi;
  const Eigen::MatrixXd N = nullspace_oracle(constraint_gradients(graph, g).rows);
  return N * (N.transpose() * xi);
}

/// Equilateral triangle with side `side` in a random rigid placement, random attitudes
/// and a velocity tangent to the constraint set.
inline SystemState random_feasible_triangle(Rng& rng, const ConstraintGraph& graph, double side,
                                            double speed = 0.5) {
  const Eigen::Matrix3d Q = random_group(rng, GroupTag::SO3).matrix();
  const Eigen::Vector3d off = 5.0 * Eigen::Vector3d(rng.normal_vec(3));
  const Eigen::Vector3d base[] = {{0, 0, 0}, {side, 0, 0}, {side / 2, side * std::sqrt(3.0) / 2, 0}};
  std::vector<GroupElement> parts;
  for (const auto& b : base) {
    parts.push_back(GroupElement::se3(random_group(rng, GroupTag::SO3).matrix(), Q * b + off));
  }
  SystemState s;
  s.g = ProductElement(parts);
  s.xi = tangent_velocity(graph, s.g, speed * rng.normal_vec(18));
  return s;
}

/// (Phi(g2) - 2 Phi(g1) + Phi(g0)) / h^2 along two Lie-Euler steps with solved multipliers.
inline Eigen::VectorXd phi_second_difference(const LagrangianModel& model, const ConstraintGraph& graph,
                                             const SystemState& s0, double h) {
  const SystemState s1 = lie_euler_step(model, graph, s0, h);
  const SystemState s2 = lie_euler_step(model, graph, s1, h);
  return (constraint_value(graph, s2.g) - 2.0 * constraint_value(graph, s1.g) + constraint_value(graph, s0.g)) /
         (h * h);
}

/// d^2 Phi / dt^2 at the start of the solved trajectory (should vanish), from
/// step-halving second differences with two Richardson levels. The discrete
/// path carries O(h) and O(h^2) terms; stepping lower than ~1e-3 only trades
/// them for cancellation in Phi.
inline double multiplier_residual(const LagrangianModel& model, const ConstraintGraph& graph, const SystemState& s0,
                                  double h = 4e-3) {
  const Eigen::VectorXd f0 = phi_second_difference(model, graph, s0, h);
  const Eigen::VectorXd f1 = phi_second_difference(model, graph, s0, h / 2);
  const Eigen::VectorXd f2 = phi_second_difference(model, graph, s0, h / 4);
  const Eigen::VectorXd r0 = 2.0 * f1 - f0;
  const Eigen::VectorXd r1 = 2.0 * f2 - f1;
  return ((4.0 * r1 - r0) / 3.0).cwiseAbs().maxCoeff();
}

}  // namespace geofeas::oracle
