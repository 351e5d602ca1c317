#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>

namespace geofeas {

/// Matrix Lie groups supported by the library.
enum class GroupTag { SO3, SE2, SE3 };

// Homogeneous matrices are at most 4x4 and algebras at most 6-dimensional,
// so fixed max-size dynamic types keep everything off the heap.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;
using AlgMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;

/// Dimension of the Lie algebra (number of velocity coordinates).
constexpr int algebra_dim(GroupTag tag) { return tag == GroupTag::SE3 ? 6 : 3; }

/// Side length of the homogeneous matrix representation.
constexpr int matrix_dim(GroupTag tag) { return tag == GroupTag::SE3 ? 4 : 3; }

/// Side length of the rotation block.
constexpr int rotation_dim(GroupTag tag) { return tag == GroupTag::SE2 ? 2 : 3; }

/// Number of translational algebra coordinates (they come first in the coordinate vector).
constexpr int translation_dim(GroupTag tag) {
  switch (tag) {
    case GroupTag::SO3: return 0;
    case GroupTag::SE2: return 2;
    case GroupTag::SE3: return 3;
  }
  return 0;
}

constexpr bool has_translation(GroupTag tag) { return tag != GroupTag::SO3; }

inline std::string_view to_string(GroupTag tag) {
  switch (tag) {
    case GroupTag::SO3: return "SO3";
    case GroupTag::SE2: return "SE2";
    case GroupTag::SE3: return "SE3";
  }
  return "?";
}

inline GroupTag parse_group_tag(std::string_view name) {
  if (name == "SO3" || name == "so3") return GroupTag::SO3;
  if (name == "SE2" || name == "se2") return GroupTag::SE2;
  if (name == "SE3" || name == "se3") return GroupTag::SE3;
  throw std::invalid_argument("unknown group '" + std::string(name) + "'");
}

inline void require_same_tag(GroupTag a, GroupTag b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": group mismatch (" + std::string(to_string(a)) +
                                " vs " + std::string(to_string(b)) + ")");
  }
}

}  // namespace geofeas
