#pragma once

// Three underwater vehicles on SE(3) keeping fixed center distances.
//
// U(R, b) = rho*gamma*g <r_bar, R^T e3> + (rho*gamma - m) g b_z
// The lump rho*gamma*g is a parameter ("buoyancy"); m g uses g_grav.

#include "geofeas/dyn/dynamics.hpp"
#include "geofeas/sim/integrators.hpp"

#include <Eigen/Core>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace geofeas::auv {

struct AuvParams {
  double mass = 123.8;                                        // kg
  Eigen::Vector3d added_mass = Eigen::Vector3d(65.0, 70.0, 75.0);  // kg
  Eigen::Vector3d inertia = Eigen::Vector3d(5.46, 5.29, 5.72);     // kg m^2, principal
  double buoyancy = 1215.8;                                   // rho*gamma*g, N
  Eigen::Vector3d r_bar = Eigen::Vector3d(0.0, 0.0, -0.007);  // m, CG to CB
  double radius = 1.0;                                        // m
  double g_grav = 9.81;                                       // m/s^2

  Eigen::Matrix3d mass_matrix() const {
    return mass * Eigen::Matrix3d::Identity() + Eigen::Matrix3d(added_mass.asDiagonal());
  }
  Eigen::Matrix3d inertia_matrix() const { return Eigen::Matrix3d(inertia.asDiagonal()); }

  /// blockdiag(M, J) in (nu, Omega) order.
  Eigen::MatrixXd metric() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(6, 6);
    m.topLeftCorner<3, 3>() = mass_matrix();
    m.bottomRightCorner<3, 3>() = inertia_matrix();
    return m;
  }

  /// (rho*gamma - m) g, the coefficient of b_z in U.
  double net_lift() const { return buoyancy - mass * g_grav; }

  void validate() const {
    if (!(mass > 0.0)) throw std::invalid_argument("auv: mass must be positive");
    if (!((mass_matrix().diagonal().array() > 0.0).all())) throw std::invalid_argument("auv: mass matrix not SPD");
    if (!((inertia.array() > 0.0).all())) throw std::invalid_argument("auv: inertia must be positive");
    if (!(radius > 0.0)) throw std::invalid_argument("auv: radius must be positive");
    if (!(g_grav > 0.0)) throw std::invalid_argument("auv: g_grav must be positive");
  }
};

class BuoyancyPotential final : public Potential {
 public:
  explicit BuoyancyPotential(AuvParams p) : p_(std::move(p)) {}

  double value(const GroupElement& g) const override {
    const Eigen::Matrix3d R = g.rotation();
    return p_.buoyancy * p_.r_bar.dot(R.transpose() * Eigen::Vector3d::UnitZ()) + p_.net_lift() * g.matrix()(2, 3);
  }

  Mat ambient_gradient(const GroupElement& g) const override {
    Mat G = Mat::Zero(4, 4);
    // <r_bar, R^T e3> = e3^T R r_bar
    G.topLeftCorner(3, 3) = p_.buoyancy * Eigen::Vector3d::UnitZ() * p_.r_bar.transpose();
    G(2, 3) = p_.net_lift();
    (void)g;
    return G;
  }

  const AuvParams& params() const { return p_; }

 private:
  AuvParams p_;
};

/// (U, W): translational and rotational potential forces in the body frame.
inline std::pair<Eigen::Vector3d, Eigen::Vector3d> potential_forces(
    const AuvParams& p, const GroupElement& g, ForceSignConvention sign = ForceSignConvention::Variational) {
  if (g.tag() != GroupTag::SE3) throw std::invalid_argument("potential_forces: needs an SE(3) pose");
  const Eigen::Matrix3d R = g.rotation();
  const Eigen::Vector3d Rte3 = R.transpose() * Eigen::Vector3d::UnitZ();
  Eigen::Vector3d U = -p.net_lift() * Rte3;
  if (sign == ForceSignConvention::AsPrinted) U = -U;
  const Eigen::Vector3d W = -p.buoyancy * p.r_bar.cross(Rte3);
  return {U, W};
}

inline LagrangianModel make_model(const std::vector<AuvParams>& agents,
                                  ForceSignConvention sign = ForceSignConvention::Variational) {
  LagrangianModel model;
  model.tag = GroupTag::SE3;
  model.force_sign = sign;
  for (const auto& p : agents) {
    p.validate();
    model.agents.emplace_back(p.metric(), std::make_shared<BuoyancyPotential>(p));
  }
  return model;
}

inline ConstraintGraph make_graph(const std::vector<AuvParams>& agents, double distance) {
  std::vector<double> radii;
  for (const auto& p : agents) radii.push_back(p.radius);
  std::vector<EdgeConstraint> edges;
  const int r = static_cast<int>(agents.size());
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) edges.push_back({i, j, 1, distance});
  }
  return ConstraintGraph(r, ConstraintKind::SE3CenterDistance, std::move(edges), std::move(radii));
}

/// Specialized right-hand side: xi' from the closed-form vehicle equations
///   M nu'    = M nu x Omega + U + sum_k lambda_k c_k
///   J Omega' = J Omega x Omega + M nu x nu + W
/// with c_k = +-2 R_i^T (b_i - b_j) for the two agents of edge k.
inline Eigen::VectorXd auv_rhs(const std::vector<AuvParams>& params, const ConstraintGraph& graph,
                               const SystemState& s, const Eigen::VectorXd& lambda,
                               ForceSignConvention sign = ForceSignConvention::Variational) {
  const int r = s.g.size();
  if (static_cast<int>(params.size()) != r) throw std::invalid_argument("auv_rhs: parameter count differs from agents");
  if (graph.kind() != ConstraintKind::SE3CenterDistance && graph.constraint_count() > 0) {
    throw std::invalid_argument("auv_rhs: needs an SE(3) center-distance graph");
  }
  if (lambda.size() != graph.constraint_count()) throw std::invalid_argument("auv_rhs: bad lambda size");

  std::vector<Eigen::Vector3d> lin(static_cast<std::size_t>(r), Eigen::Vector3d::Zero());
  for (int k = 0; k < graph.constraint_count(); ++k) {
    const auto& e = graph.edges()[static_cast<std::size_t>(k)];
    const Eigen::Vector3d diff = s.g[e.i].matrix().block<3, 1>(0, 3) - s.g[e.j].matrix().block<3, 1>(0, 3);
    lin[static_cast<std::size_t>(e.i)] += lambda(k) * 2.0 * s.g[e.i].matrix().topLeftCorner<3, 3>().transpose() * diff;
    lin[static_cast<std::size_t>(e.j)] -= lambda(k) * 2.0 * s.g[e.j].matrix().topLeftCorner<3, 3>().transpose() * diff;
  }

  Eigen::VectorXd out(6 * r);
  for (int i = 0; i < r; ++i) {
    const auto& p = params[static_cast<std::size_t>(i)];
    const Eigen::Vector3d nu = s.xi.segment<3>(6 * i);
    const Eigen::Vector3d Om = s.xi.segment<3>(6 * i + 3);
    const Eigen::Matrix3d M = p.mass_matrix();
    const Eigen::Matrix3d J = p.inertia_matrix();
    const auto [U, W] = potential_forces(p, s.g[i], sign);
    const Eigen::Vector3d fl = (M * nu).cross(Om) + U + lin[static_cast<std::size_t>(i)];
    const Eigen::Vector3d fr = (J * Om).cross(Om) + (M * nu).cross(nu) + W;
    out.segment<3>(6 * i) = M.ldlt().solve(fl);
    out.segment<3>(6 * i + 3) = J.ldlt().solve(fr);
  }
  return out;
}

/// Per-step controls: u (force, N) and u_bar (torque, N m) per agent.
struct ControlSignal {
  std::vector<double> times;
  /// controls[step][agent] = (u, u_bar)
  std::vector<std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>> controls;

  std::size_t size() const { return times.size(); }

  /// Stacked (u_1, u_bar_1, ..., u_r, u_bar_r) at one step.
  Eigen::VectorXd stacked(std::size_t step) const {
    const auto& row = controls.at(step);
    Eigen::VectorXd v(6 * static_cast<Eigen::Index>(row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) {
      v.segment<3>(6 * static_cast<Eigen::Index>(i)) = row[i].first;
      v.segment<3>(6 * static_cast<Eigen::Index>(i) + 3) = row[i].second;
    }
    return v;
  }
};

namespace detail {

// xi' by forward differences of recorded states (backward at the last record).
// On an undecimated run of either explicit scheme this returns the applied rhs up to roundoff.
inline std::vector<Eigen::VectorXd> differenced_rates(const Trajectory& traj) {
  const std::size_t n = traj.records.size();
  if (n < 2) throw std::invalid_argument("extract_control: trajectory has no stored rhs and fewer than 2 records");
  std::vector<Eigen::VectorXd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = k + 1 == n ? k - 1 : k;
    const auto& ra = traj.records[a].state;
    const auto& rb = traj.records[a + 1].state;
    out[k] = (rb.xi - ra.xi) / (rb.t - ra.t);
  }
  return out;
}

}  // namespace detail

/// u = M nu' - M nu x Omega - U,  u_bar = J Omega' - J Omega x Omega - M nu x nu - W.
inline ControlSignal extract_control(const std::vector<AuvParams>& params, const Trajectory& traj,
                                     ForceSignConvention sign = ForceSignConvention::Variational) {
  if (traj.tag != GroupTag::SE3) throw std::invalid_argument("extract_control: needs an SE(3) trajectory");
  if (static_cast<int>(params.size()) != traj.agents) {
    throw std::invalid_argument("extract_control: parameter count differs from agents");
  }
  std::vector<Eigen::VectorXd> rates;
  if (!traj.has_rhs()) rates = detail::differenced_rates(traj);

  ControlSignal sig;
  sig.times.reserve(traj.size());
  sig.controls.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& rec = traj.records[k];
    const Eigen::VectorXd& xd = rates.empty() ? rec.xi_dot : rates[k];
    std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> row;
    for (int i = 0; i < traj.agents; ++i) {
      const auto& p = params[static_cast<std::size_t>(i)];
      const Eigen::Vector3d nu = rec.state.xi.segment<3>(6 * i);
      const Eigen::Vector3d Om = rec.state.xi.segment<3>(6 * i + 3);
      const Eigen::Matrix3d M = p.mass_matrix();
      const Eigen::Matrix3d J = p.inertia_matrix();
      const auto [U, W] = potential_forces(p, rec.state.g[i], sign);
      const Eigen::Vector3d u = M * xd.segment<3>(6 * i) - (M * nu).cross(Om) - U;
      const Eigen::Vector3d ub = J * xd.segment<3>(6 * i + 3) - (J * Om).cross(Om) - (M * nu).cross(nu) - W;
      if (!u.allFinite() || !ub.allFinite()) throw std::runtime_error("extract_control: non-finite control");
      row.emplace_back(u, ub);
    }
    sig.times.push_back(rec.state.t);
    sig.controls.push_back(std::move(row));
  }
  return sig;
}

/// The published three-vehicle set-up: equilateral triangle of side 12 m in the
/// plane z = 0, every vehicle with R = I, Omega = (0.3, 0.2, 0.1), nu = (0.1, 0.2, 1).
struct PaperScenario {
  std::vector<AuvParams> params;
  double distance = 10.0;
  SystemState initial;
  IntegratorConfig integrator;
};

inline PaperScenario paper_scenario() {
  PaperScenario sc;
  sc.params.assign(3, AuvParams{});
  const double s3 = std::sqrt(3.0);
  const std::vector<Eigen::Vector3d> b = {
      {0.0, 0.0, 0.0},
      {10.0, std::sqrt(44.0), 0.0},
      {5.0 + std::sqrt(33.0), std::sqrt(11.0) - 5.0 * s3, 0.0},
  };
  std::vector<GroupElement> g;
  for (const auto& bi : b) g.push_back(GroupElement::se3(Eigen::Matrix3d::Identity(), bi));
  sc.initial.t = 0.0;
  sc.initial.g = ProductElement(std::move(g));
  sc.initial.xi.resize(18);
  for (int i = 0; i < 3; ++i) {
    sc.initial.xi.segment<3>(6 * i) << 0.1, 0.2, 1.0;
    sc.initial.xi.segment<3>(6 * i + 3) << 0.3, 0.2, 0.1;
  }
  sc.integrator.h = 0.005;
  sc.integrator.steps = 5000;
  return sc;
}

}  // namespace geofeas::auv
