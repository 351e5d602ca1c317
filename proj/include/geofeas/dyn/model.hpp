#pragma once

#include "geofeas/lie/element.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace geofeas {

/// Potential energy U(g) of one agent, in joules.
class Potential {
 public:
  virtual ~Potential() = default;
  virtual double value(const GroupElement& g) const = 0;
  /// dU/dg as a matrix in the ambient (homogeneous) matrix space.
  virtual Mat ambient_gradient(const GroupElement& g) const = 0;
};

class ZeroPotential final : public Potential {
 public:
  double value(const GroupElement&) const override { return 0.0; }
  Mat ambient_gradient(const GroupElement& g) const override {
    return Mat::Zero(g.matrix().rows(), g.matrix().cols());
  }
};

/// How potential forces enter the translational equations.
enum class ForceSignConvention {
  /// Force = -(left-trivialized gradient of U).
  Variational,
  /// Translational potential force with the opposite sign (reproduces the printed AUV equations).
  AsPrinted,
};

/// Kinetic metric (d^2 l / d xi^2) and potential of one agent.
///
/// l(g, xi) = 1/2 xi^T metric xi - U(g); for SE(3) the metric is blockdiag(M, J)
/// in (nu, Omega) order.
class AgentModel {
 public:
  AgentModel(Eigen::MatrixXd metric, std::shared_ptr<const Potential> potential = std::make_shared<ZeroPotential>())
      : metric_(std::move(metric)), potential_(std::move(potential)) {
    if (metric_.rows() != metric_.cols()) throw std::invalid_argument("AgentModel: metric must be square");
    if ((metric_ - metric_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument("AgentModel: metric is not symmetric");
    }
    llt_.compute(metric_);
    if (llt_.info() != Eigen::Success) throw std::invalid_argument("AgentModel: metric is not positive definite");
    if (!potential_) potential_ = std::make_shared<ZeroPotential>();
  }

  const Eigen::MatrixXd& metric() const { return metric_; }
  const Potential& potential() const { return *potential_; }
  std::shared_ptr<const Potential> potential_ptr() const { return potential_; }

  Eigen::VectorXd solve_metric(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }

 private:
  Eigen::MatrixXd metric_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  std::shared_ptr<const Potential> potential_;
};

struct LagrangianModel {
  GroupTag tag = GroupTag::SE3;
  std::vector<AgentModel> agents;
  ForceSignConvention force_sign = ForceSignConvention::Variational;

  int size() const { return static_cast<int>(agents.size()); }

  void validate() const {
    const int n = algebra_dim(tag);
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (agents[i].metric().rows() != n) {
        throw std::invalid_argument("LagrangianModel: agent " + std::to_string(i + 1) + " metric is not " +
                                    std::to_string(n) + "x" + std::to_string(n));
      }
    }
  }

  /// Block-diagonal metric over all agents.
  Eigen::MatrixXd stacked_metric() const {
    const int n = algebra_dim(tag);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size() * n, size() * n);
    for (int i = 0; i < size(); ++i) m.block(i * n, i * n, n, n) = agents[static_cast<std::size_t>(i)].metric();
    return m;
  }
};

}  // namespace geofeas
