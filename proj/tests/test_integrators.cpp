#include "geofeas/sim/integrators.hpp"
#include "support/dyn_oracles.hpp"

#include <gtest/gtest.h>

using namespace geofeas;
using geofeas::oracle::Rng;

namespace {

struct Rig {
  std::vector<auv::AuvParams> params;
  LagrangianModel model;
  ConstraintGraph graph;
  SystemState initial;
};

Rig paper_setup() {
  const auv::PaperScenario sc = auv::paper_scenario();
  return {sc.params, auv::make_model(sc.params), auv::make_graph(sc.params, sc.distance), sc.initial};
}

// Random attitudes and velocities: the multipliers are far from zero here.
Rig generic_setup(std::uint64_t seed) {
  Rng rng(seed);
  Rig s;
  s.params.assign(3, auv::AuvParams{});
  s.model = auv::make_model(s.params);
  s.graph = auv::make_graph(s.params, 10.0);
  s.initial = oracle::random_feasible_triangle(rng, s.graph, 12.0, 0.5);
  return s;
}

double state_distance(const SystemState& a, const SystemState& b) {
  double d = (a.xi - b.xi).norm();
  for (int i = 0; i < a.g.size(); ++i) d += (a.g[i].matrix() - b.g[i].matrix()).norm();
  return d;
}

SystemState final_state(const Rig& s, IntegratorMethod m, double h, int steps) {
  IntegratorConfig cfg;
  cfg.method = m;
  cfg.h = h;
  cfg.steps = steps;
  cfg.record_every = steps;
  return run_simulation(s.model, s.graph, s.initial, cfg).records.back().state;
}

}  // namespace

TEST(EulerStep, PaperInitialTranslationStep) {
  const Rig s = paper_setup();
  const SystemState next = euler_step(s.model, s.graph, s.initial, 0.005);
  const Eigen::Vector3d expected(0.0005, 0.001, 0.005);
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d moved = next.g[i].translation() - s.initial.g[i].translation();
    EXPECT_LE((moved - expected).norm(), 1e-15);
  }
  EXPECT_DOUBLE_EQ(next.t, 0.005);
}

TEST(EulerStep, EquilibriumIsUnchangedExceptTime) {
  auv::AuvParams p;
  p.mass = p.buoyancy / p.g_grav;
  const std::vector<auv::AuvParams> params(3, p);
  const LagrangianModel model = auv::make_model(params);
  const ConstraintGraph graph = auv::make_graph(params, 10.0);
  SystemState s = auv::paper_scenario().initial;
  s.xi.setZero();
  for (auto step : {euler_step, lie_euler_step}) {
    const SystemState next = step(model, graph, s, 0.01);
    EXPECT_EQ(state_distance(next, s), 0.0);
    EXPECT_DOUBLE_EQ(next.t, 0.01);
  }
}

TEST(EulerStep, GlobalErrorIsFirstOrder) {
  const Rig s = generic_setup(51);
  const double h = 0.01;
  const SystemState a = final_state(s, IntegratorMethod::Euler, h, 100);
  const SystemState b = final_state(s, IntegratorMethod::Euler, h / 2, 200);
  const SystemState c = final_state(s, IntegratorMethod::Euler, h / 4, 400);
  const double ratio = state_distance(b, c) / state_distance(a, b);
  EXPECT_NEAR(ratio, 0.5, 0.15) << ratio;
}

TEST(LieEulerStep, StaysOrthogonalOverThePaperHorizon) {
  const Rig s = paper_setup();
  IntegratorConfig cfg;
  cfg.record_every = 100;
  const Trajectory t = run_simulation(s.model, s.graph, s.initial, cfg);
  EXPECT_LE(t.max_orthogonality_error(), 1e-10);
}

TEST(LieEulerStep, AgreesWithEulerToSecondOrderPerStep) {
  Rng rng(52);
  const Rig s = generic_setup(52);
  for (int trial = 0; trial < 10; ++trial) {
    const SystemState st = oracle::random_feasible_triangle(rng, s.graph, 12.0);
    auto gap = [&](double h) {
      return state_distance(euler_step(s.model, s.graph, st, h), lie_euler_step(s.model, s.graph, st, h));
    };
    const double g1 = gap(1e-2), g2 = gap(5e-3);
    EXPECT_NEAR(g2 / g1, 0.25, 0.05);
    EXPECT_LE(g1, 1e-3);
  }
}

TEST(LieEulerStep, ZeroVelocityKeepsConfiguration) {
  SystemState s = auv::paper_scenario().initial;
  s.xi.setZero();
  const SystemState next = step_with(IntegratorMethod::LieEuler, s, Eigen::VectorXd::Zero(18), 0.1);
  for (int i = 0; i < 3; ++i) EXPECT_EQ((next.g[i].matrix() - s.g[i].matrix()).norm(), 0.0);
}

TEST(RunSimulation, DecimationKeepsEveryKthRecordAndTheLast) {
  const Rig s = paper_setup();
  IntegratorConfig cfg;
  cfg.steps = 100;
  cfg.record_every = 10;
  const Trajectory t = run_simulation(s.model, s.graph, s.initial, cfg);
  ASSERT_EQ(t.records.size(), 11u);
  for (std::size_t k = 0; k < t.records.size(); ++k) {
    EXPECT_EQ(t.records[k].step, static_cast<int>(10 * k));
    EXPECT_DOUBLE_EQ(t.records[k].state.t, 10.0 * static_cast<double>(k) * cfg.h);
  }
  cfg.steps = 95;
  EXPECT_EQ(run_simulation(s.model, s.graph, s.initial, cfg).records.back().step, 95);
}

TEST(RunSimulation, ZeroDynamicsKeepsDiagnosticsConstant) {
  auv::AuvParams p;
  p.mass = p.buoyancy / p.g_grav;
  const std::vector<auv::AuvParams> params(3, p);
  SystemState s = auv::paper_scenario().initial;
  s.xi.setZero();
  IntegratorConfig cfg;
  cfg.steps = 200;
  const Trajectory t = run_simulation(auv::make_model(params), auv::make_graph(params, 10.0), s, cfg);
  const auto& first = t.records.front();
  for (const auto& r : t.records) {
    EXPECT_EQ(r.energy, first.energy);
    EXPECT_EQ((r.phi - first.phi).norm(), 0.0);
    EXPECT_EQ(r.lambda.norm(), 0.0);
    EXPECT_EQ(r.spatial_momentum.norm(), 0.0);
  }
}

TEST(RunSimulation, IsDeterministic) {
  const Rig s = generic_setup(53);
  IntegratorConfig cfg;
  cfg.steps = 300;
  const Trajectory a = run_simulation(s.model, s.graph, s.initial, cfg);
  const Trajectory b = run_simulation(s.model, s.graph, s.initial, cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(state_distance(a.records[k].state, b.records[k].state), 0.0);
    EXPECT_EQ((a.records[k].lambda - b.records[k].lambda).norm(), 0.0);
  }
}

TEST(RunSimulation, ConstraintDriftIsFirstOrderOnAGenericTriangle) {
  const Rig s = generic_setup(54);
  auto drift = [&](double h, int steps) {
    IntegratorConfig cfg;
    cfg.h = h;
    cfg.steps = steps;
    cfg.record_every = 1;
    const Trajectory t = run_simulation(s.model, s.graph, s.initial, cfg);
    double w = 0.0;
    for (const auto& r : t.records) w = std::max(w, center_distance_error(s.graph, r.state.g).maxCoeff());
    return w;
  };
  const double d1 = drift(0.005, 200), d2 = drift(0.0025, 400);
  EXPECT_GT(d1, 1e-8);
  EXPECT_NEAR(d2 / d1, 0.5, 0.2) << d1 << " " << d2;
}

TEST(RunSimulation, ConstraintRateGrowsAtMostLinearly) {
  const Rig s = generic_setup(55);
  IntegratorConfig cfg;
  cfg.h = 0.005;
  cfg.steps = 400;
  const Trajectory t = run_simulation(s.model, s.graph, s.initial, cfg);
  // |dPhi/dt|(t) <= C h t, with C fitted on the first half and checked on the second
  double c = 0.0;
  for (const auto& r : t.records) {
    if (r.step == 0 || r.step > 200) continue;
    c = std::max(c, r.phi_dot.cwiseAbs().maxCoeff() / (cfg.h * r.state.t));
  }
  for (const auto& r : t.records) {
    if (r.step <= 200) continue;
    EXPECT_LE(r.phi_dot.cwiseAbs().maxCoeff(), 2.0 * c * cfg.h * r.state.t);
  }
}

TEST(RunSimulation, FreeEnergyDriftIsFirstOrder) {
  Rng rng(56);
  LagrangianModel model;
  model.tag = GroupTag::SE3;
  model.agents.emplace_back(auv::AuvParams{}.metric());
  const ConstraintGraph none(1, ConstraintKind::SE3CenterDistance, {}, {1.0});
  SystemState s;
  s.g = ProductElement({oracle::random_group(rng, GroupTag::SE3)});
  s.xi = rng.normal_vec(6);
  auto drift = [&](double h, int steps) {
    IntegratorConfig cfg;
    cfg.h = h;
    cfg.steps = steps;
    const Trajectory t = run_simulation(model, none, s, cfg);
    double w = 0.0;
    for (const auto& r : t.records) w = std::max(w, std::abs(r.energy - t.records.front().energy));
    return w;
  };
  const double e1 = drift(0.01, 100), e2 = drift(0.005, 200);
  EXPECT_NEAR(e2 / e1, 0.5, 0.2) << e1 << " " << e2;
}

TEST(RunSimulation, InfeasibleStartIsRejectedWithTheConstraintLabel) {
  Rig s = paper_setup();
  s.initial.g[2] = GroupElement::se3(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0, 0, 20));
  try {
    run_simulation(s.model, s.graph, s.initial, IntegratorConfig{});
    FAIL() << "expected InfeasibleStateError";
  } catch (const InfeasibleStateError& e) {
    EXPECT_EQ(e.constraint(), "(2,3,1)");  // |phi| = 400 there, 256 on (1,3,1)
  }
}

TEST(RunSimulation, DependentConstraintsAreSingularWithStepIndex) {
  // the same pair constrained twice: rows coincide
  const std::vector<auv::AuvParams> params(2);
  const ConstraintGraph graph(2, ConstraintKind::SE3CenterDistance, {{0, 1, 1, 10.0}, {0, 1, 2, 10.0}}, {1.0, 1.0});
  SystemState s;
  s.g = ProductElement({GroupElement::se3(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()),
                        GroupElement::se3(Eigen::Matrix3d::Identity(), Eigen::Vector3d(12, 0, 0))});
  s.xi = Eigen::VectorXd::Zero(12);
  try {
    run_simulation(auv::make_model(params), graph, s, IntegratorConfig{});
    FAIL() << "expected SingularConstraintError";
  } catch (const SingularConstraintError& e) {
    EXPECT_EQ(e.step(), 0);
  }
}

TEST(RunSimulation, DisabledConstraintsGiveZeroMultipliers) {
  const Rig s = generic_setup(57);
  IntegratorConfig cfg;
  cfg.steps = 50;
  cfg.constraints_enabled = false;
  const Trajectory t = run_simulation(s.model, s.graph, s.initial, cfg);
  for (const auto& r : t.records) EXPECT_EQ(r.lambda.norm(), 0.0);
}

TEST(RunSimulation, ProjectionRemovesDrift) {
  const Rig s = generic_setup(58);
  IntegratorConfig cfg;
  cfg.steps = 400;
  cfg.project_positions = true;
  EXPECT_LE(run_simulation(s.model, s.graph, s.initial, cfg).max_abs_phi(), 1e-9);
}

TEST(IntegratorConfig, RejectsBadValues) {
  IntegratorConfig cfg;
  cfg.h = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.h = 0.01;
  cfg.steps = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_EQ(parse_integrator_method("euler"), IntegratorMethod::Euler);
  EXPECT_THROW(parse_integrator_method("rk4"), std::invalid_argument);
}
