#pragma once

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace geofeas {

/// Which holonomic distance constraint an edge carries.
enum class ConstraintKind {
  /// ||psi(g_j) g_i||_F^2 - (d^2 + 3) on SE(2).
  SE2Frobenius,
  /// ||b_i - b_j||^2 - (r_i + r_j + d)^2 on SE(3).
  SE3CenterDistance,
};

/// One constraint phi_ij^k. Agent indices are zero-based; k is the constraint label.
struct EdgeConstraint {
  int i = 0;
  int j = 1;
  int k = 1;
  double distance = 0.0;  // d_ij^k, meters

  /// "(i,j,k)" with one-based agent numbers, as used in reports.
  std::string label() const {
    std::ostringstream os;
    os << "(" << i + 1 << "," << j + 1 << "," << k << ")";
    return os.str();
  }
};

/// Undirected constraint graph. Edges are normalised to i < j and sorted by
/// (i, j, k); that order fixes the meaning of every multiplier and CSV column.
class ConstraintGraph {
 public:
  ConstraintGraph() = default;

  ConstraintGraph(int agents, ConstraintKind kind, std::vector<EdgeConstraint> edges, std::vector<double> radii = {})
      : agents_(agents), kind_(kind), edges_(std::move(edges)), radii_(std::move(radii)) {
    if (agents_ < 1) throw std::invalid_argument("ConstraintGraph: need at least one agent");
    if (radii_.empty()) radii_.assign(static_cast<std::size_t>(agents_), 0.0);
    if (static_cast<int>(radii_.size()) != agents_) {
      throw std::invalid_argument("ConstraintGraph: radii count does not match agent count");
    }
    for (double r : radii_) {
      if (!(r >= 0.0)) throw std::invalid_argument("ConstraintGraph: radii must be non-negative");
    }
    for (auto& e : edges_) {
      if (e.i > e.j) std::swap(e.i, e.j);
      if (e.i == e.j) throw std::invalid_argument("ConstraintGraph: self-loop on agent " + std::to_string(e.i + 1));
      if (e.i < 0 || e.j >= agents_) {
        throw std::invalid_argument("ConstraintGraph: edge " + e.label() + " references a missing agent");
      }
      if (!(e.distance > 0.0)) throw std::invalid_argument("ConstraintGraph: edge " + e.label() + " needs d > 0");
    }
    std::sort(edges_.begin(), edges_.end(), [](const EdgeConstraint& a, const EdgeConstraint& b) {
      return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
    });
  }

  int agents() const { return agents_; }
  ConstraintKind kind() const { return kind_; }
  const std::vector<EdgeConstraint>& edges() const { return edges_; }
  const std::vector<double>& radii() const { return radii_; }

  /// Total number of scalar constraints (m-bar).
  int constraint_count() const { return static_cast<int>(edges_.size()); }

  /// Squared target center distance for edge e.
  double target_squared(const EdgeConstraint& e) const {
    if (kind_ == ConstraintKind::SE2Frobenius) return e.distance * e.distance;
    const double s = radii_[static_cast<std::size_t>(e.i)] + radii_[static_cast<std::size_t>(e.j)] + e.distance;
    return s * s;
  }

  /// Graph with every edge removed (same agents and radii).
  ConstraintGraph without_edges() const { return ConstraintGraph(agents_, kind_, {}, radii_); }

 private:
  int agents_ = 1;
  ConstraintKind kind_ = ConstraintKind::SE3CenterDistance;
  std::vector<EdgeConstraint> edges_;
  std::vector<double> radii_;
};

}  // namespace geofeas
