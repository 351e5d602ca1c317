#pragma once

#include "geofeas/dyn/dynamics.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace geofeas {

/// Stacked agent state at one instant.
struct SystemState {
  double t = 0.0;
  ProductElement g;
  Eigen::VectorXd xi;
};

enum class IntegratorMethod {
  /// g <- g + h g xi^ (entrywise), then re-projection of the rotation blocks.
  Euler,
  /// g <- g exp(h xi).
  LieEuler,
};

inline std::string to_string(IntegratorMethod m) { return m == IntegratorMethod::Euler ? "euler" : "lie_euler"; }

inline IntegratorMethod parse_integrator_method(const std::string& s) {
  if (s == "euler") return IntegratorMethod::Euler;
  if (s == "lie_euler") return IntegratorMethod::LieEuler;
  throw std::invalid_argument("unknown integrator method '" + s + "' (expected euler or lie_euler)");
}

/// Allowed |Phi| and |dPhi/dt| at the start of a run.
inline constexpr double kInitialFeasibilityTolerance = 1e-5;

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::LieEuler;
  double h = 0.005;
  int steps = 5000;
  /// Re-solve lambda at every step; otherwise keep the initial multipliers.
  bool refresh_multipliers = true;
  int record_every = 1;
  /// Gauss-Newton projection of positions onto Phi = 0 after every step.
  bool project_positions = false;
  /// When false the dynamics ignore the graph (lambda = 0); diagnostics still report its Phi.
  bool constraints_enabled = true;

  void validate() const {
    if (!(h > 0.0)) throw std::invalid_argument("integrator: h must be positive");
    if (steps < 1) throw std::invalid_argument("integrator: steps must be at least 1");
    if (record_every < 1) throw std::invalid_argument("integrator: record_every must be at least 1");
  }
};

/// One recorded instant.
struct TrajectoryRecord {
  int step = 0;
  SystemState state;
  Eigen::VectorXd lambda;
  /// xi' used to leave this state (the stored right-hand side).
  Eigen::VectorXd xi_dot;
  Eigen::VectorXd phi;
  Eigen::VectorXd phi_dot;
  double energy = 0.0;
  Eigen::VectorXd spatial_momentum;
  double orthogonality_error = 0.0;
};

struct Trajectory {
  GroupTag tag = GroupTag::SE3;
  int agents = 0;
  double h = 0.0;
  std::vector<TrajectoryRecord> records;

  std::size_t size() const { return records.size(); }
  bool has_rhs() const { return !records.empty() && records.front().xi_dot.size() > 0; }

  double max_abs_phi() const {
    double w = 0.0;
    for (const auto& r : records) w = std::max(w, worst_violation(r.phi).second);
    return w;
  }
  double max_abs_phi_dot() const {
    double w = 0.0;
    for (const auto& r : records) w = std::max(w, worst_violation(r.phi_dot).second);
    return w;
  }
  double max_orthogonality_error() const {
    double w = 0.0;
    for (const auto& r : records) w = std::max(w, r.orthogonality_error);
    return w;
  }
};

namespace detail {

inline ProductElement advance_configuration(IntegratorMethod method, const ProductElement& g, const Eigen::VectorXd& xi,
                                            double h) {
  const GroupTag tag = g.tag();
  const int n = algebra_dim(tag);
  std::vector<GroupElement> next;
  next.reserve(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) {
    const AlgebraElement x(tag, h * xi.segment(i * n, n));
    if (method == IntegratorMethod::LieEuler) {
      next.push_back(compose(g[i], exp_map(x)));
    } else {
      const Mat m = g[i].matrix() + g[i].matrix() * x.matrix();
      next.push_back(GroupElement::projected(tag, m));
    }
  }
  return ProductElement(std::move(next));
}

inline double max_orthogonality_error(const ProductElement& g) {
  double w = 0.0;
  for (const auto& p : g.parts()) w = std::max(w, orthogonality_error(p.rotation()));
  return w;
}

}  // namespace detail

/// Constrained right-hand side with freshly solved multipliers.
inline Eigen::VectorXd constrained_xi_dot(const LagrangianModel& model, const ConstraintGraph& graph,
                                          const SystemState& s, Eigen::VectorXd* lambda_out = nullptr) {
  const MultiplierSolve sol = solve_multipliers(model, graph, s.g, s.xi, ManifoldCheck::Skip);
  if (lambda_out) *lambda_out = sol.lambda;
  return constrained_el_rhs(model, graph, s.g, s.xi, sol.lambda);
}

inline SystemState step_with(IntegratorMethod method, const SystemState& s, const Eigen::VectorXd& xi_dot, double h) {
  SystemState next;
  next.t = s.t + h;
  next.g = detail::advance_configuration(method, s.g, s.xi, h);
  next.xi = s.xi + h * xi_dot;
  return next;
}

inline SystemState euler_step(const LagrangianModel& model, const ConstraintGraph& graph, const SystemState& s,
                              double h) {
  return step_with(IntegratorMethod::Euler, s, constrained_xi_dot(model, graph, s), h);
}

inline SystemState lie_euler_step(const LagrangianModel& model, const ConstraintGraph& graph, const SystemState& s,
                                  double h) {
  return step_with(IntegratorMethod::LieEuler, s, constrained_xi_dot(model, graph, s), h);
}

/// Diagnostics at one state; lambda and xi_dot are filled by the caller.
inline TrajectoryRecord make_record(const LagrangianModel& model, const ConstraintGraph& graph, int step,
                                    const SystemState& s) {
  TrajectoryRecord r;
  r.step = step;
  r.state = s;
  const ConstraintEvaluation ev = constraint_gradients(graph, s.g);
  r.phi = ev.values;
  r.phi_dot = ev.rows * s.xi;
  r.energy = total_energy(model, s.g, s.xi);
  r.spatial_momentum = spatial_momentum(model, s.g, s.xi);
  r.orthogonality_error = detail::max_orthogonality_error(s.g);
  return r;
}

/// Checks the starting state of a constrained run; throws InfeasibleStateError naming the edge.
inline void check_initial_state(const ConstraintGraph& graph, const SystemState& s,
                                double tol = kInitialFeasibilityTolerance) {
  if (graph.constraint_count() == 0) return;
  const ConstraintEvaluation ev = constraint_gradients(graph, s.g);
  const Eigen::VectorXd rate = ev.rows * s.xi;
  const auto [wp, vp] = worst_violation(ev.values);
  const auto [wr, vr] = worst_violation(rate);
  if (vp > tol || vr > tol) {
    const int w = vp > tol ? wp : wr;
    const std::string label = graph.edges()[static_cast<std::size_t>(w)].label();
    std::ostringstream os;
    if (vp > tol) {
      os << "initial state violates constraint " << label << ": |phi| = " << vp;
    } else {
      os << "initial velocity violates constraint " << label << ": |dphi/dt| = " << vr;
    }
    throw InfeasibleStateError(os.str(), std::max(vp, vr), label);
  }
}

/// Integrates the constrained dynamics for cfg.steps steps.
///
/// Records step 0, every record_every-th step and the final step. Each record
/// carries the multipliers and xi' used to leave it (for the final record these
/// are evaluated at the final state).
inline Trajectory run_simulation(const LagrangianModel& model, const ConstraintGraph& graph, SystemState state,
                                 const IntegratorConfig& cfg) {
  cfg.validate();
  model.validate();
  const ConstraintGraph dyn_graph = cfg.constraints_enabled ? graph : graph.without_edges();
  if (cfg.constraints_enabled) {
    check_initial_state(graph, state);
    const RegularityReport reg = regularity_check(model, graph, state.g);
    if (!reg.regular) {
      const double cond = reg.smallest_singular_value > 0.0
                              ? reg.largest_singular_value / reg.smallest_singular_value
                              : std::numeric_limits<double>::infinity();
      throw SingularConstraintError("initial state is not regular", cond, 0);
    }
  }

  Trajectory traj;
  traj.tag = model.tag;
  traj.agents = model.size();
  traj.h = cfg.h;
  traj.records.reserve(static_cast<std::size_t>(cfg.steps / cfg.record_every + 2));

  std::optional<Eigen::VectorXd> frozen;
  for (int s = 0; s <= cfg.steps; ++s) {
    Eigen::VectorXd lambda;
    Eigen::VectorXd xi_dot;
    try {
      if (cfg.refresh_multipliers || !frozen) {
        lambda = solve_multipliers(model, dyn_graph, state.g, state.xi, ManifoldCheck::Skip).lambda;
        if (!cfg.refresh_multipliers) frozen = lambda;
      } else {
        lambda = *frozen;
      }
      xi_dot = constrained_el_rhs(model, dyn_graph, state.g, state.xi, lambda);
    } catch (const SingularConstraintError& e) {
      std::ostringstream os;
      os << "multiplier system became singular at step " << s << " (t = " << state.t
         << ", condition number " << e.condition_number() << ")";
      throw SingularConstraintError(os.str(), e.condition_number(), s);
    }

    if (s % cfg.record_every == 0 || s == cfg.steps) {
      TrajectoryRecord r = make_record(model, graph, s, state);
      r.lambda = cfg.constraints_enabled ? lambda : Eigen::VectorXd::Zero(graph.constraint_count());
      r.xi_dot = xi_dot;
      traj.records.push_back(std::move(r));
    }
    if (s == cfg.steps) break;

    SystemState next = step_with(cfg.method, state, xi_dot, cfg.h);
    next.t = (s + 1) * cfg.h;
    if (cfg.project_positions && cfg.constraints_enabled) next.g = project_onto_constraints(graph, std::move(next.g));
    state = std::move(next);
  }
  return traj;
}

/// Integrates the unconstrained, fully actuated system with controls u(step, state).
inline Trajectory run_controlled(const LagrangianModel& model, const ConstraintGraph& diagnostics_graph,
                                 SystemState state, const IntegratorConfig& cfg,
                                 const std::function<Eigen::VectorXd(int, const SystemState&)>& control) {
  cfg.validate();
  model.validate();
  Trajectory traj;
  traj.tag = model.tag;
  traj.agents = model.size();
  traj.h = cfg.h;
  for (int s = 0; s <= cfg.steps; ++s) {
    const Eigen::VectorXd u = control(s, state);
    const Eigen::VectorXd xi_dot = controlled_rhs(model, state.g, state.xi, u);
    if (s % cfg.record_every == 0 || s == cfg.steps) {
      TrajectoryRecord r = make_record(model, diagnostics_graph, s, state);
      r.lambda = Eigen::VectorXd::Zero(diagnostics_graph.constraint_count());
      r.xi_dot = xi_dot;
      traj.records.push_back(std::move(r));
    }
    if (s == cfg.steps) break;
    SystemState next = step_with(cfg.method, state, xi_dot, cfg.h);
    next.t = (s + 1) * cfg.h;
    state = std::move(next);
  }
  return traj;
}

}  // namespace geofeas
