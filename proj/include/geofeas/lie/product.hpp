#pragma once

// Finite products G^r and g^r. Algebra elements of the product are stacked
// coordinate vectors of length r * n; brackets and actions act blockwise.

#include "geofeas/lie/element.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace geofeas {

class ProductElement {
 public:
  ProductElement() = default;
  explicit ProductElement(std::vector<GroupElement> parts) : parts_(std::move(parts)) {
    for (const auto& p : parts_) require_same_tag(parts_.front().tag(), p.tag(), "ProductElement");
  }

  static ProductElement identity(GroupTag tag, int r) {
    return ProductElement(std::vector<GroupElement>(static_cast<std::size_t>(r), GroupElement::identity(tag)));
  }

  int size() const { return static_cast<int>(parts_.size()); }
  bool empty() const { return parts_.empty(); }
  GroupTag tag() const {
    if (parts_.empty()) throw std::logic_error("ProductElement: empty product has no group tag");
    return parts_.front().tag();
  }

  const GroupElement& operator[](int i) const { return parts_.at(static_cast<std::size_t>(i)); }
  GroupElement& operator[](int i) { return parts_.at(static_cast<std::size_t>(i)); }

  const std::vector<GroupElement>& parts() const { return parts_; }

 private:
  std::vector<GroupElement> parts_;
};

/// Stacked algebra coordinates (xi_1, ..., xi_r).
class ProductAlgebraElement {
 public:
  ProductAlgebraElement() = default;
  ProductAlgebraElement(GroupTag tag, Eigen::VectorXd coords) : tag_(tag), coords_(std::move(coords)) {
    if (coords_.size() % algebra_dim(tag) != 0) {
      throw std::invalid_argument("ProductAlgebraElement: length is not a multiple of the algebra dimension");
    }
  }

  static ProductAlgebraElement zero(GroupTag tag, int r) { return {tag, Eigen::VectorXd::Zero(r * algebra_dim(tag))}; }

  GroupTag tag() const { return tag_; }
  int size() const { return static_cast<int>(coords_.size()) / algebra_dim(tag_); }
  const Eigen::VectorXd& coords() const { return coords_; }

  AlgebraElement part(int i) const {
    const int n = algebra_dim(tag_);
    return {tag_, coords_.segment(i * n, n)};
  }

 private:
  GroupTag tag_ = GroupTag::SE3;
  Eigen::VectorXd coords_;
};

inline ProductElement compose(const ProductElement& g, const ProductElement& h) {
  if (g.size() != h.size()) throw std::invalid_argument("compose: product sizes differ");
  std::vector<GroupElement> out;
  out.reserve(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) out.push_back(compose(g[i], h[i]));
  return ProductElement(std::move(out));
}

inline ProductElement inverse(const ProductElement& g) {
  std::vector<GroupElement> out;
  out.reserve(static_cast<std::size_t>(g.size()));
  for (const auto& p : g.parts()) out.push_back(inverse(p));
  return ProductElement(std::move(out));
}

/// Componentwise bracket [xi, eta] = ([xi^1, eta^1], ..., [xi^r, eta^r]).
inline ProductAlgebraElement bracket(const ProductAlgebraElement& xi, const ProductAlgebraElement& eta) {
  require_same_tag(xi.tag(), eta.tag(), "bracket");
  if (xi.size() != eta.size()) throw std::invalid_argument("bracket: product sizes differ");
  const int n = algebra_dim(xi.tag());
  Eigen::VectorXd out(xi.coords().size());
  for (int i = 0; i < xi.size(); ++i) out.segment(i * n, n) = ad(xi.part(i), eta.part(i)).coords();
  return {xi.tag(), std::move(out)};
}

/// Block-diagonal matrix with block i equal to adjoint_matrix(g_i).
inline Eigen::MatrixXd adjoint_matrix(const ProductElement& g) {
  const int n = algebra_dim(g.tag());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g.size() * n, g.size() * n);
  for (int i = 0; i < g.size(); ++i) out.block(i * n, i * n, n, n) = adjoint_matrix(g[i]);
  return out;
}

}  // namespace geofeas
