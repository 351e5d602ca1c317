#pragma once

// Admissible velocities for kinematic left-invariant multi-agent systems.
//
// A velocity xi in g^r is admissible at g when every transported constraint
// row annihilates it:  < Ad*_{g^-1}(T*_e L_{g^-1} dPhi_ij(g)), xi > = 0.
// The transported rows are the coefficient matrix A(g); admissible velocities
// form its nullspace. By duality <Ad*_{g^-1} mu, xi> = <mu, Ad_{g^-1} xi>, so
// an admissible xi corresponds to the body velocity Ad_{g_i^-1} xi_i of each
// agent.

#include "geofeas/constraint/constraints.hpp"
#include "geofeas/errors.hpp"
#include "geofeas/lie/product.hpp"

#include <Eigen/Core>
#include <Eigen/SVD>

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>
#include <vector>

namespace geofeas {

/// Relative singular-value threshold used for rank decisions.
inline constexpr double kRankTolerance = 1e-10;
/// |Phi| allowed at a base point handed to admissible_velocity_space.
inline constexpr double kFeasibilityTolerance = 1e-6;

struct FeasibilitySystem {
  ProductElement base_point;
  /// m-bar x (r n) transported constraint rows.
  Eigen::MatrixXd coefficients;
  Eigen::VectorXd singular_values;
  int rank = 0;
  /// Orthonormal columns spanning the admissible velocities (the set O).
  Eigen::MatrixXd nullspace;

  int nullspace_dim() const { return static_cast<int>(nullspace.cols()); }
  ProductAlgebraElement basis_element(int k) const { return {base_point.tag(), nullspace.col(k)}; }
};

/// Applies Ad*_{g_i^-1} to agent i's block of every row.
inline Eigen::MatrixXd coadjoint_transport(const ProductElement& g, const Eigen::MatrixXd& rows) {
  const int n = algebra_dim(g.tag());
  if (rows.cols() != g.size() * n) throw std::invalid_argument("coadjoint_transport: row width does not match g");
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (int i = 0; i < g.size(); ++i) {
    // Row vectors: (Ad_{g^-1}^T mu)^T = mu^T Ad_{g^-1}.
    out.middleCols(i * n, n) = rows.middleCols(i * n, n) * adjoint_matrix(inverse(g[i]));
  }
  return out;
}

namespace detail {

// Deterministic orthonormal basis of range(P) for an orthogonal projector P:
// project the coordinate axes (translations first, each group by descending
// projected length), Gram-Schmidt them, then order by translational weight.
inline Eigen::MatrixXd canonical_basis(const Eigen::MatrixXd& projector, int dim, GroupTag tag) {
  const int total = static_cast<int>(projector.rows());
  const int n = algebra_dim(tag);
  const int nt = translation_dim(tag);
  auto is_translation = [&](int c) { return (c % n) < nt; };

  std::vector<int> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (is_translation(a) != is_translation(b)) return is_translation(a);
    return projector.col(a).norm() > projector.col(b).norm() + 1e-12;
  });

  Eigen::MatrixXd basis(total, dim);
  int found = 0;
  for (int c : order) {
    if (found == dim) break;
    Eigen::VectorXd v = projector.col(c);
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < found; ++k) v -= basis.col(k).dot(v) * basis.col(k);
    }
    const double len = v.norm();
    if (len < 1e-6) continue;
    basis.col(found++) = v / len;
  }
  basis.conservativeResize(Eigen::NoChange, found);

  auto translational_weight = [&](int k) {
    double w = 0.0;
    for (int c = 0; c < total; ++c) {
      if (is_translation(c)) w += basis(c, k) * basis(c, k);
    }
    return w;
  };
  std::vector<int> cols(static_cast<std::size_t>(found));
  std::iota(cols.begin(), cols.end(), 0);
  std::vector<double> weight(static_cast<std::size_t>(found));
  for (int k = 0; k < found; ++k) weight[static_cast<std::size_t>(k)] = translational_weight(k);
  std::stable_sort(cols.begin(), cols.end(), [&](int a, int b) {
    return weight[static_cast<std::size_t>(a)] > weight[static_cast<std::size_t>(b)] + 1e-12;
  });
  Eigen::MatrixXd sorted(total, found);
  for (int k = 0; k < found; ++k) sorted.col(k) = basis.col(cols[static_cast<std::size_t>(k)]);
  return sorted;
}

}  // namespace detail

/// Rank and orthonormal nullspace of an arbitrary coefficient matrix with r n columns.
inline FeasibilitySystem feasibility_from_coefficients(const ProductElement& g, Eigen::MatrixXd coefficients) {
  const int cols = static_cast<int>(coefficients.cols());
  FeasibilitySystem sys;
  sys.base_point = g;
  sys.coefficients = std::move(coefficients);
  if (sys.coefficients.rows() == 0) {
    sys.singular_values = Eigen::VectorXd(0);
    sys.rank = 0;
    sys.nullspace = Eigen::MatrixXd::Identity(cols, cols);
    return sys;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.coefficients, Eigen::ComputeFullV);
  sys.singular_values = svd.singularValues();
  const double smax = sys.singular_values.size() > 0 ? sys.singular_values(0) : 0.0;
  sys.rank = 0;
  for (Eigen::Index k = 0; k < sys.singular_values.size(); ++k) {
    if (smax > 0.0 && sys.singular_values(k) > smax * kRankTolerance) ++sys.rank;
  }
  const int dim = cols - sys.rank;
  const Eigen::MatrixXd null = svd.matrixV().rightCols(dim);
  sys.nullspace = detail::canonical_basis(null * null.transpose(), dim, g.tag());
  return sys;
}

/// Theorem-1 system at a feasible base point.
inline FeasibilitySystem admissible_velocity_space(const ConstraintGraph& graph, const ProductElement& g,
                                                   double feasibility_tol = kFeasibilityTolerance) {
  const ConstraintEvaluation ev = constraint_gradients(graph, g);
  const auto [worst, violation] = worst_violation(ev.values);
  if (violation > feasibility_tol) {
    const std::string label = graph.edges()[static_cast<std::size_t>(worst)].label();
    std::ostringstream os;
    os << "base point violates constraint " << label << ": |phi| = " << violation;
    throw InfeasibleStateError(os.str(), violation, label);
  }
  return feasibility_from_coefficients(g, coadjoint_transport(g, ev.rows));
}

/// One step of the group abstraction g' = sum_k K_k omega_k.
///
/// basis columns are transported (admissible) velocities; agent i moves with
/// body velocity Ad_{g_i^-1} of its block, i.e. g_i <- g_i exp(h Ad_{g_i^-1} eta_i).
inline ProductElement abstraction_step(const Eigen::MatrixXd& basis, const Eigen::VectorXd& omega,
                                       const ProductElement& g, double h) {
  if (omega.size() != basis.cols()) {
    throw std::invalid_argument("abstraction_step: got " + std::to_string(omega.size()) + " inputs for " +
                                std::to_string(basis.cols()) + " basis elements");
  }
  const GroupTag tag = g.tag();
  const int n = algebra_dim(tag);
  if (basis.rows() != g.size() * n) throw std::invalid_argument("abstraction_step: basis does not match g");
  const Eigen::VectorXd eta = basis * omega;
  std::vector<GroupElement> next;
  next.reserve(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) {
    const AlgebraElement spatial(tag, h * eta.segment(i * n, n));
    next.push_back(compose(g[i], exp_map(Ad(inverse(g[i]), spatial))));
  }
  return ProductElement(std::move(next));
}

enum class BasisMode {
  /// Recompute the admissible basis at every step.
  Refresh,
  /// Keep the basis computed at the initial configuration.
  Frozen,
};

struct AbstractionRun {
  ProductElement final_configuration;
  /// max_k |phi_k| after each step (entry 0 is the initial configuration).
  std::vector<double> drift;
  double max_drift() const { return drift.empty() ? 0.0 : *std::max_element(drift.begin(), drift.end()); }
};

/// Drives the abstraction with inputs omega(t, s) for `steps` steps of size h.
inline AbstractionRun integrate_abstraction(const ConstraintGraph& graph, ProductElement g,
                                            const std::function<Eigen::VectorXd(double, int)>& omega, double h,
                                            int steps, BasisMode mode = BasisMode::Refresh, bool project = false) {
  AbstractionRun run;
  run.drift.reserve(static_cast<std::size_t>(steps) + 1);
  run.drift.push_back(worst_violation(constraint_value(graph, g)).second);
  Eigen::MatrixXd basis = admissible_velocity_space(graph, g).nullspace;
  for (int s = 0; s < steps; ++s) {
    if (mode == BasisMode::Refresh && s > 0) {
      const ConstraintEvaluation ev = constraint_gradients(graph, g);
      basis = feasibility_from_coefficients(g, coadjoint_transport(g, ev.rows)).nullspace;
    }
    g = abstraction_step(basis, omega(s * h, static_cast<int>(basis.cols())), g, h);
    if (project) g = project_onto_constraints(graph, std::move(g));
    run.drift.push_back(worst_violation(constraint_value(graph, g)).second);
  }
  run.final_configuration = std::move(g);
  return run;
}

}  // namespace geofeas
