#pragma once

// Constrained Euler-Lagrange dynamics on G^r x g^r.
//
// Per agent, with mu_i = metric_i xi_i:
//   metric_i xi_i' = ad*_{xi_i} mu_i + F_i(g_i) + sum_k lambda_k rows_k,i
// where F_i is the potential force and rows are the left-trivialized
// constraint gradients. Multipliers come from the index-reduced condition
// d^2 Phi / dt^2 = 0:
//   (D M^-1 D^T) lambda = -D M^-1 f(g, xi) - Q(g, xi),
// Q being the velocity-quadratic part of the constraint acceleration.

#include "geofeas/constraint/constraints.hpp"
#include "geofeas/dyn/model.hpp"
#include "geofeas/errors.hpp"
#include "geofeas/lie/product.hpp"

#include <Eigen/Core>
#include <Eigen/SVD>

#include <limits>
#include <sstream>

namespace geofeas {

/// Condition number of the multiplier matrix above which the constraint set is declared singular.
inline constexpr double kMaxMultiplierCondition = 1e12;
/// Relative smallest singular value below which the regularity matrix is singular.
inline constexpr double kRegularityTolerance = 1e-8;
/// |Phi| and |dPhi/dt| allowed by the checked multiplier solve.
inline constexpr double kManifoldTolerance = 1e-6;

struct MultiplierSolve {
  Eigen::MatrixXd matrix;  // A_lambda
  Eigen::VectorXd rhs;     // c
  Eigen::VectorXd lambda;
  double condition_number = 1.0;
};

struct RegularityReport {
  Eigen::MatrixXd matrix;
  double smallest_singular_value = 0.0;
  double largest_singular_value = 0.0;
  bool regular = false;
};

enum class ManifoldCheck { Enforce, Skip };

namespace detail {

inline void check_model(const LagrangianModel& model, const ProductElement& g, const Eigen::VectorXd& xi) {
  if (model.size() != g.size()) throw std::invalid_argument("dynamics: model and configuration sizes differ");
  if (!g.empty()) require_same_tag(model.tag, g.tag(), "dynamics");
  if (xi.size() != g.size() * algebra_dim(model.tag)) {
    throw std::invalid_argument("dynamics: velocity vector has the wrong length");
  }
}

}  // namespace detail

inline double kinetic_energy(const LagrangianModel& model, const Eigen::VectorXd& xi) {
  const int n = algebra_dim(model.tag);
  double e = 0.0;
  for (int i = 0; i < model.size(); ++i) {
    const auto x = xi.segment(i * n, n);
    e += 0.5 * x.dot(model.agents[static_cast<std::size_t>(i)].metric() * x);
  }
  return e;
}

inline double potential_energy(const LagrangianModel& model, const ProductElement& g) {
  double e = 0.0;
  for (int i = 0; i < model.size(); ++i) e += model.agents[static_cast<std::size_t>(i)].potential().value(g[i]);
  return e;
}

/// L(g, xi) = sum_i l_i.
inline double lagrangian(const LagrangianModel& model, const ProductElement& g, const Eigen::VectorXd& xi) {
  return kinetic_energy(model, xi) - potential_energy(model, g);
}

inline double total_energy(const LagrangianModel& model, const ProductElement& g, const Eigen::VectorXd& xi) {
  return kinetic_energy(model, xi) + potential_energy(model, g);
}

/// L(g, xi) - lambda . Phi(g).
inline double augmented_lagrangian(const LagrangianModel& model, const ConstraintGraph& graph, const ProductElement& g,
                                   const Eigen::VectorXd& xi, const Eigen::VectorXd& lambda) {
  detail::check_model(model, g, xi);
  const Eigen::VectorXd phi = constraint_value(graph, g);
  if (lambda.size() != phi.size()) throw std::invalid_argument("augmented_lagrangian: lambda has the wrong length");
  return lagrangian(model, g, xi) - lambda.dot(phi);
}

/// Stacked potential forces, -T*_e L_g(dU/dg) per agent (sign per model.force_sign).
inline Eigen::VectorXd potential_force(const LagrangianModel& model, const ProductElement& g) {
  const int n = algebra_dim(model.tag);
  const int nt = translation_dim(model.tag);
  Eigen::VectorXd f(model.size() * n);
  for (int i = 0; i < model.size(); ++i) {
    const auto& agent = model.agents[static_cast<std::size_t>(i)];
    Vec fi = -trivialize(g[i], agent.potential().ambient_gradient(g[i]));
    if (model.force_sign == ForceSignConvention::AsPrinted) fi.head(nt) *= -1.0;
    f.segment(i * n, n) = fi;
  }
  return f;
}

/// Stacked ad*_{xi_i}(metric_i xi_i).
inline Eigen::VectorXd gyroscopic_force(const LagrangianModel& model, const Eigen::VectorXd& xi) {
  const int n = algebra_dim(model.tag);
  Eigen::VectorXd f(model.size() * n);
  for (int i = 0; i < model.size(); ++i) {
    const AlgebraElement x(model.tag, xi.segment(i * n, n));
    const CoAlgebraElement mu(model.tag, model.agents[static_cast<std::size_t>(i)].metric() * x.coords());
    f.segment(i * n, n) = coad(x, mu).coords();
  }
  return f;
}

/// Everything on the right of metric * xi' except constraint forces.
inline Eigen::VectorXd free_force(const LagrangianModel& model, const ProductElement& g, const Eigen::VectorXd& xi) {
  return gyroscopic_force(model, xi) + potential_force(model, g);
}

/// Blockwise metric^-1 * v.
inline Eigen::VectorXd apply_inverse_metric(const LagrangianModel& model, const Eigen::VectorXd& v) {
  const int n = algebra_dim(model.tag);
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < model.size(); ++i) {
    out.segment(i * n, n) = model.agents[static_cast<std::size_t>(i)].solve_metric(v.segment(i * n, n));
  }
  return out;
}

/// xi' from the constrained Euler-Lagrange equations for given multipliers.
inline Eigen::VectorXd constrained_el_rhs(const LagrangianModel& model, const ConstraintGraph& graph,
                                          const ProductElement& g, const Eigen::VectorXd& xi,
                                          const Eigen::VectorXd& lambda) {
  detail::check_model(model, g, xi);
  Eigen::VectorXd f = free_force(model, g, xi);
  if (graph.constraint_count() > 0) {
    if (lambda.size() != graph.constraint_count()) throw std::invalid_argument("constrained_el_rhs: bad lambda size");
    f += constraint_gradients(graph, g).rows.transpose() * lambda;
  }
  return apply_inverse_metric(model, f);
}

/// xi' of the fully actuated, unconstrained system driven by stacked controls u.
inline Eigen::VectorXd controlled_rhs(const LagrangianModel& model, const ProductElement& g, const Eigen::VectorXd& xi,
                                      const Eigen::VectorXd& u) {
  detail::check_model(model, g, xi);
  return apply_inverse_metric(model, free_force(model, g, xi) + u);
}

/// Controls that make the unconstrained system follow (g, xi, xi').
inline Eigen::VectorXd control_from_motion(const LagrangianModel& model, const ProductElement& g,
                                           const Eigen::VectorXd& xi, const Eigen::VectorXd& xi_dot) {
  detail::check_model(model, g, xi);
  const int n = algebra_dim(model.tag);
  Eigen::VectorXd u(xi.size());
  for (int i = 0; i < model.size(); ++i) {
    u.segment(i * n, n) = model.agents[static_cast<std::size_t>(i)].metric() * xi_dot.segment(i * n, n);
  }
  return u - free_force(model, g, xi);
}

/// Multipliers that keep d^2 Phi / dt^2 = 0.
inline MultiplierSolve solve_multipliers(const LagrangianModel& model, const ConstraintGraph& graph,
                                         const ProductElement& g, const Eigen::VectorXd& xi,
                                         ManifoldCheck check = ManifoldCheck::Enforce) {
  detail::check_model(model, g, xi);
  MultiplierSolve out;
  const int m = graph.constraint_count();
  if (m == 0) {
    out.matrix = Eigen::MatrixXd(0, 0);
    out.rhs = out.lambda = Eigen::VectorXd(0);
    return out;
  }
  const ConstraintEvaluation ev = constraint_gradients(graph, g);
  if (check == ManifoldCheck::Enforce) {
    const Eigen::VectorXd rate = ev.rows * xi;
    const auto [wp, vp] = worst_violation(ev.values);
    const auto [wr, vr] = worst_violation(rate);
    if (vp > kManifoldTolerance || vr > kManifoldTolerance) {
      const int w = vp > kManifoldTolerance ? wp : wr;
      const std::string label = graph.edges()[static_cast<std::size_t>(w)].label();
      std::ostringstream os;
      os << "state is off the constraint manifold at " << label << " (|phi| = " << vp << ", |dphi/dt| = " << vr << ")";
      throw InfeasibleStateError(os.str(), std::max(vp, vr), label);
    }
  }
  const Eigen::MatrixXd& D = ev.rows;
  Eigen::MatrixXd MinvDt(D.cols(), m);
  for (int k = 0; k < m; ++k) MinvDt.col(k) = apply_inverse_metric(model, D.row(k).transpose());
  out.matrix = D * MinvDt;
  out.rhs = -D * apply_inverse_metric(model, free_force(model, g, xi)) - constraint_curvature(graph, g, xi);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  out.condition_number = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(out.condition_number <= kMaxMultiplierCondition)) {
    std::ostringstream os;
    os << "multiplier system is singular (condition number " << out.condition_number << ")";
    throw SingularConstraintError(os.str(), out.condition_number);
  }
  out.lambda = svd.solve(out.rhs);
  return out;
}

/// Invertibility of [[d^2 l / d xi^2, D^T], [D, 0]] at g.
inline RegularityReport regularity_check(const LagrangianModel& model, const ConstraintGraph& graph,
                                         const ProductElement& g) {
  const int m = graph.constraint_count();
  const Eigen::MatrixXd metric = model.stacked_metric();
  const int dim = static_cast<int>(metric.rows());
  RegularityReport rep;
  rep.matrix = Eigen::MatrixXd::Zero(dim + m, dim + m);
  rep.matrix.topLeftCorner(dim, dim) = metric;
  if (m > 0) {
    const Eigen::MatrixXd D = constraint_gradients(graph, g).rows;
    rep.matrix.topRightCorner(dim, m) = D.transpose();
    rep.matrix.bottomLeftCorner(m, dim) = D;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rep.matrix);
  const auto& sv = svd.singularValues();
  rep.largest_singular_value = sv(0);
  rep.smallest_singular_value = sv(sv.size() - 1);
  rep.regular = rep.smallest_singular_value > kRegularityTolerance * rep.largest_singular_value;
  return rep;
}

/// Per-agent spatial momentum Ad*_{g_i^-1}(metric_i xi_i), stacked.
inline Eigen::VectorXd spatial_momentum(const LagrangianModel& model, const ProductElement& g,
                                        const Eigen::VectorXd& xi) {
  const int n = algebra_dim(model.tag);
  Eigen::VectorXd out(xi.size());
  for (int i = 0; i < model.size(); ++i) {
    const CoAlgebraElement body(model.tag, model.agents[static_cast<std::size_t>(i)].metric() * xi.segment(i * n, n));
    out.segment(i * n, n) = coAd(inverse(g[i]), body).coords();
  }
  return out;
}

}  // namespace geofeas
