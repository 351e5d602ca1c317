#include "geofeas/dyn/dynamics.hpp"
#include "geofeas/kin/feasibility.hpp"
#include "support/dyn_oracles.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

using namespace geofeas;
using geofeas::oracle::Rng;

namespace {

ConstraintGraph auv_triangle(double d = 10.0) { return auv::make_graph(std::vector<auv::AuvParams>(3), d); }

// Lagrangian model with random SPD metrics and the vehicle potential.
LagrangianModel random_model(Rng& rng, GroupTag tag, int r, bool with_potential) {
  LagrangianModel m;
  m.tag = tag;
  for (int i = 0; i < r; ++i) {
    std::shared_ptr<const Potential> pot;
    if (with_potential && tag == GroupTag::SE3) {
      auv::AuvParams p;
      p.r_bar = 0.05 * Eigen::Vector3d(rng.normal_vec(3));
      p.mass = 100.0 + 10.0 * rng.uniform(0, 1);
      pot = std::make_shared<auv::BuoyancyPotential>(p);
    }
    m.agents.emplace_back(oracle::random_spd(rng, algebra_dim(tag)), pot);
  }
  return m;
}

}  // namespace

TEST(AugmentedLagrangian, ZeroMultipliersGiveTheSumOfAgentLagrangians) {
  Rng rng(41);
  const auto params = std::vector<auv::AuvParams>(3);
  const LagrangianModel model = auv::make_model(params);
  const ConstraintGraph graph = auv_triangle();
  const SystemState s = oracle::random_feasible_triangle(rng, graph, 12.0);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd x = s.xi.segment(6 * i, 6);
    sum += 0.5 * x.dot(params[0].metric() * x) - model.agents[0].potential().value(s.g[i]);
  }
  EXPECT_NEAR(augmented_lagrangian(model, graph, s.g, s.xi, Eigen::VectorXd::Zero(3)), sum, 1e-9);
  // on the constraint set lambda drops out
  EXPECT_NEAR(augmented_lagrangian(model, graph, s.g, s.xi, rng.normal_vec(3) * 100.0), sum, 1e-6);
}

TEST(AugmentedLagrangian, SingleBodyAtRestNeutralBuoyancy) {
  auv::AuvParams p;
  p.mass = p.buoyancy / p.g_grav;
  const LagrangianModel model = auv::make_model({p});
  const ConstraintGraph none(1, ConstraintKind::SE3CenterDistance, {}, {1.0});
  const ProductElement g = ProductElement::identity(GroupTag::SE3, 1);
  const double l = augmented_lagrangian(model, none, g, Eigen::VectorXd::Zero(6), Eigen::VectorXd(0));
  EXPECT_NEAR(l, 1215.8 * 0.007, 1e-12);
  EXPECT_NEAR(l, 8.51, 5e-3);
}

TEST(EulerLagrange, ReducesToEulerPoincareForAFreeRotor) {
  Rng rng(42);
  LagrangianModel model;
  model.tag = GroupTag::SO3;
  const Eigen::Matrix3d J = Eigen::Vector3d(5.46, 5.29, 5.72).asDiagonal();
  model.agents.emplace_back(Eigen::MatrixXd(J));
  const ConstraintGraph none(1, ConstraintKind::SE3CenterDistance, {});
  for (int trial = 0; trial < 20; ++trial) {
    const ProductElement g({oracle::random_group(rng, GroupTag::SO3)});
    const Eigen::Vector3d Om = rng.normal_vec(3);
    const Eigen::Vector3d expected = J.inverse() * (J * Om).cross(Om);
    const Eigen::VectorXd got = constrained_el_rhs(model, none, g, Om, Eigen::VectorXd(0));
    EXPECT_LE((got - Eigen::VectorXd(expected)).norm(), 1e-13);
  }
}

TEST(EulerLagrange, NeutralEquilibriumStaysAtRest) {
  auv::AuvParams p;
  p.mass = p.buoyancy / p.g_grav;
  const LagrangianModel model = auv::make_model({p, p, p});
  const ConstraintGraph graph = auv_triangle();
  const SystemState s = auv::paper_scenario().initial;
  const Eigen::VectorXd rhs = constrained_el_rhs(model, graph, s.g, Eigen::VectorXd::Zero(18), Eigen::VectorXd::Zero(3));
  EXPECT_LE(rhs.norm(), 1e-12);
}

TEST(EulerLagrange, MatchesFiniteDifferenceResidual) {
  Rng rng(43);
  for (GroupTag t : {GroupTag::SE2, GroupTag::SE3}) {
    const int n = algebra_dim(t);
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
      const LagrangianModel model = random_model(rng, t, 3, true);
      const ConstraintKind kind = t == GroupTag::SE2 ? ConstraintKind::SE2Frobenius : ConstraintKind::SE3CenterDistance;
      const ConstraintGraph graph(3, kind, {{0, 1, 1, 2.0}, {0, 2, 1, 2.0}, {1, 2, 1, 2.0}}, {0.5, 0.5, 0.5});
      std::vector<GroupElement> parts;
      for (int i = 0; i < 3; ++i) parts.push_back(oracle::random_group(rng, t));
      const ProductElement g(parts);
      const Eigen::VectorXd xi = rng.normal_vec(3 * n);
      const Eigen::VectorXd lambda = rng.normal_vec(3);
      const Eigen::VectorXd got = constrained_el_rhs(model, graph, g, xi, lambda);

      Eigen::VectorXd force(3 * n);
      for (int i = 0; i < 3; ++i) {
        const auto& a = model.agents[static_cast<std::size_t>(i)];
        const Eigen::VectorXd mu = a.metric() * xi.segment(i * n, n);
        const Eigen::VectorXd dU = oracle::fd_trivialized_gradient(
            [&](const GroupElement& x) { return a.potential().value(x); }, g[i]);
        force.segment(i * n, n) = oracle::coad_oracle(t, xi.segment(i * n, n), mu) - dU;
      }
      for (int k = 0; k < 3; ++k) {
        force += lambda(k) * oracle::fd_trivialized_gradient(
                                 [&](const ProductElement& x) { return constraint_value(graph, x)(k); }, g);
      }
      Eigen::VectorXd expected(3 * n);
      for (int i = 0; i < 3; ++i) {
        expected.segment(i * n, n) =
            model.agents[static_cast<std::size_t>(i)].metric().ldlt().solve(force.segment(i * n, n));
      }
      worst = std::max(worst, oracle::rel_error(got, expected));
    }
    EXPECT_LE(worst, 1e-5) << to_string(t);
  }
}

TEST(EulerLagrange, AsPrintedFlipsOnlyTheTranslationalPotentialForce) {
  const auto params = std::vector<auv::AuvParams>(1);
  const LagrangianModel var = auv::make_model(params, ForceSignConvention::Variational);
  const LagrangianModel prn = auv::make_model(params, ForceSignConvention::AsPrinted);
  Rng rng(44);
  const ProductElement g({oracle::random_group(rng, GroupTag::SE3)});
  const Eigen::VectorXd a = potential_force(var, g);
  const Eigen::VectorXd b = potential_force(prn, g);
  EXPECT_LE((a.head(3) + b.head(3)).norm(), 1e-12);
  EXPECT_LE((a.tail(3) - b.tail(3)).norm(), 1e-12);
}

TEST(Multipliers, StaticTriangleNeedsNoForce) {
  auv::AuvParams p;
  p.mass = p.buoyancy / p.g_grav;
  const LagrangianModel model = auv::make_model({p, p, p});
  const SystemState s = auv::paper_scenario().initial;
  const MultiplierSolve sol = solve_multipliers(model, auv_triangle(), s.g, Eigen::VectorXd::Zero(18));
  EXPECT_LE(sol.lambda.norm(), 1e-12);
}

TEST(Multipliers, PaperInitialStateIsRegular) {
  const auv::PaperScenario sc = auv::paper_scenario();
  const LagrangianModel model = auv::make_model(sc.params);
  const ConstraintGraph graph = auv::make_graph(sc.params, sc.distance);
  EXPECT_NO_THROW(solve_multipliers(model, graph, sc.initial.g, sc.initial.xi));
  EXPECT_TRUE(regularity_check(model, graph, sc.initial.g).regular);
}

TEST(Multipliers, SecondDerivativeOfConstraintsVanishes) {
  Rng rng(45);
  const auto params = std::vector<auv::AuvParams>(3);
  const LagrangianModel model = auv::make_model(params);
  const ConstraintGraph graph = auv_triangle();
  for (int trial = 0; trial < 10; ++trial) {
    const SystemState s = oracle::random_feasible_triangle(rng, graph, 12.0);
    EXPECT_LE(oracle::multiplier_residual(model, graph, s), 1e-5);
  }
}

TEST(Multipliers, OffManifoldStateIsRejected) {
  const auv::PaperScenario sc = auv::paper_scenario();
  const LagrangianModel model = auv::make_model(sc.params);
  const ConstraintGraph graph = auv::make_graph(sc.params, sc.distance);
  Eigen::VectorXd xi = sc.initial.xi;
  xi(0) += 1.0;  // agent 1 drifts away along x
  EXPECT_THROW(solve_multipliers(model, graph, sc.initial.g, xi), InfeasibleStateError);
  EXPECT_NO_THROW(solve_multipliers(model, graph, sc.initial.g, xi, ManifoldCheck::Skip));
}

TEST(Multipliers, CoincidentAgentsAreSingular) {
  const auto params = std::vector<auv::AuvParams>(2);
  const LagrangianModel model = auv::make_model(params);
  const ConstraintGraph graph = auv::make_graph(params, 10.0);
  const ProductElement g = ProductElement::identity(GroupTag::SE3, 2);
  EXPECT_FALSE(regularity_check(model, graph, g).regular);
  try {
    solve_multipliers(model, graph, g, Eigen::VectorXd::Zero(12), ManifoldCheck::Skip);
    FAIL() << "expected SingularConstraintError";
  } catch (const SingularConstraintError& e) {
    EXPECT_GT(e.condition_number(), kMaxMultiplierCondition);
  }
}

TEST(Multipliers, RandomMetricsAtGenericPositionsAreRegular) {
  Rng rng(46);
  const ConstraintGraph graph = auv_triangle();
  int regular = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const LagrangianModel model = random_model(rng, GroupTag::SE3, 3, false);
    const SystemState s = oracle::random_feasible_triangle(rng, graph, 12.0);
    regular += regularity_check(model, graph, s.g).regular ? 1 : 0;
  }
  EXPECT_EQ(regular, 100);
}

TEST(Multipliers, SystemMatrixIsSymmetricPositiveDefinite) {
  Rng rng(47);
  const ConstraintGraph graph = auv_triangle();
  const LagrangianModel model = random_model(rng, GroupTag::SE3, 3, true);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemState s = oracle::random_feasible_triangle(rng, graph, 12.0);
    const MultiplierSolve sol = solve_multipliers(model, graph, s.g, s.xi);
    EXPECT_LE((sol.matrix - sol.matrix.transpose()).norm(), 1e-10 * sol.matrix.norm());
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sol.matrix).eigenvalues().minCoeff(), 0.0);
    EXPECT_LE((sol.matrix * sol.lambda - sol.rhs).norm(), 1e-9 * std::max(1.0, sol.rhs.norm()));
  }
}

TEST(Multipliers, ConstraintForcesDoNoVirtualWork) {
  Rng rng(48);
  const ConstraintGraph graph = auv_triangle();
  const LagrangianModel model = auv::make_model(std::vector<auv::AuvParams>(3));
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const SystemState s = oracle::random_feasible_triangle(rng, graph, 12.0);
    const MultiplierSolve sol = solve_multipliers(model, graph, s.g, s.xi);
    const Eigen::VectorXd fc = constraint_gradients(graph, s.g).rows.transpose() * sol.lambda;
    const FeasibilitySystem fs = admissible_velocity_space(graph, s.g);
    for (int k = 0; k < fs.nullspace_dim(); ++k) {
      Eigen::VectorXd body(18);
      for (int i = 0; i < 3; ++i) {
        body.segment(6 * i, 6) = Ad(inverse(s.g[i]), AlgebraElement(GroupTag::SE3, fs.nullspace.col(k).segment(6 * i, 6))).coords();
      }
      worst = std::max(worst, std::abs(fc.dot(body)));
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Multipliers, RelabelingPermutesMultipliers) {
  Rng rng(49);
  const ConstraintGraph graph = auv_triangle();
  const LagrangianModel model = random_model(rng, GroupTag::SE3, 3, true);
  const SystemState s = oracle::random_feasible_triangle(rng, graph, 12.0);
  // swap agents 2 and 3: edges (1,2),(1,3),(2,3) become (1,3),(1,2),(2,3)
  LagrangianModel swapped = model;
  std::swap(swapped.agents[1], swapped.agents[2]);
  const ProductElement g2({s.g[0], s.g[2], s.g[1]});
  Eigen::VectorXd xi2(18);
  xi2 << s.xi.segment(0, 6), s.xi.segment(12, 6), s.xi.segment(6, 6);
  const Eigen::VectorXd a = solve_multipliers(model, graph, s.g, s.xi).lambda;
  const Eigen::VectorXd b = solve_multipliers(swapped, graph, g2, xi2).lambda;
  EXPECT_NEAR(a(0), b(1), 1e-9 * std::max(1.0, a.norm()));
  EXPECT_NEAR(a(1), b(0), 1e-9 * std::max(1.0, a.norm()));
  EXPECT_NEAR(a(2), b(2), 1e-9 * std::max(1.0, a.norm()));
}

TEST(Momentum, SpatialMomentumOfARotorIsRJOmega) {
  Rng rng(50);
  LagrangianModel model;
  model.tag = GroupTag::SO3;
  model.agents.emplace_back(oracle::random_spd(rng, 3));
  const ProductElement g({oracle::random_group(rng, GroupTag::SO3)});
  const Eigen::VectorXd Om = rng.normal_vec(3);
  const Eigen::VectorXd expected = g[0].rotation() * model.agents[0].metric() * Om;
  EXPECT_LE((spatial_momentum(model, g, Om) - expected).norm(), 1e-12);
}
