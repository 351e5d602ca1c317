#pragma once

#include <stdexcept>
#include <string>

namespace geofeas {

/// A configuration or state is off the constraint manifold beyond tolerance.
class InfeasibleStateError : public std::runtime_error {
 public:
  InfeasibleStateError(const std::string& what, double max_violation, std::string constraint)
      : std::runtime_error(what), max_violation_(max_violation), constraint_(std::move(constraint)) {}

  double max_violation() const { return max_violation_; }
  /// Label "(i,j,k)" of the worst constraint.
  const std::string& constraint() const { return constraint_; }

 private:
  double max_violation_;
  std::string constraint_;
};

/// The multiplier system is singular: coincident agents or dependent constraint rows.
class SingularConstraintError : public std::runtime_error {
 public:
  SingularConstraintError(const std::string& what, double condition_number, long step = -1)
      : std::runtime_error(what), condition_number_(condition_number), step_(step) {}

  double condition_number() const { return condition_number_; }
  /// Integration step at which the solve failed, or -1 outside a simulation.
  long step() const { return step_; }

 private:
  double condition_number_;
  long step_;
};

}  // namespace geofeas
