#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "kamc/error.hpp"
#include "kamc/ka/staircase.hpp"
#include "kamc/matrix.hpp"

namespace kamc::ka {

using Point = std::array<double, 2>;
using EmbeddingValue = std::array<double, kFamilies>;

/// Plateau values closer than this count as a collision.
inline constexpr double kCollisionTolerance = 1e-9;

/// Product of one plateau per axis for one family: Phi_k is constant on it.
struct PlateauCell {
  std::size_t family = 0;
  std::int64_t index_x = 0;
  std::int64_t index_y = 0;
  double value = 0.0;  // lambda_1 phi_k + lambda_2 phi_k on the cell
  Point center{};      // center of the cell clipped to the unit square
};

/// Phi: I^2 -> R^5 with Phi_k(x, y) = lambda_1 phi_k(x) + lambda_2 phi_k(y).
class KAEmbedding {
 public:
  KAEmbedding(std::size_t level, double gamma,
              std::array<double, 2> lambda = {1.0, std::numbers::sqrt2})
      : level_(level), gamma_(gamma), lambda_(lambda) {
    for (std::size_t k = 0; k < kFamilies; ++k) families_.emplace_back(k, level, gamma);
    if (!(lambda[0] > 0.0 && lambda[1] > 0.0))
      throw ConfigError("lambda", "weights must be positive");
  }

  std::size_t level() const noexcept { return level_; }
  double gamma() const noexcept { return gamma_; }
  double sigma() const noexcept { return 1.0 / static_cast<double>(level_); }
  const std::array<double, 2>& lambda() const noexcept { return lambda_; }
  const Staircase& family(std::size_t k) const { return families_.at(k); }

  double coordinate(std::size_t k, const Point& x) const {
    return lambda_[0] * families_[k](x[0]) + lambda_[1] * families_[k](x[1]);
  }

  EmbeddingValue operator()(const Point& x) const {
    EmbeddingValue v{};
    for (std::size_t k = 0; k < kFamilies; ++k) v[k] = coordinate(k, x);
    return v;
  }

  /// Sup-metric Lipschitz constant of every coordinate: ramp slope times
  /// lambda_1 + lambda_2.
  double lipschitz_bound() const { return (lambda_[0] + lambda_[1]) / gamma_; }

  bool on_boundary(const Point& x) const {
    for (const auto& f : families_)
      if (f.on_boundary(x[0]) || f.on_boundary(x[1])) return true;
    return false;
  }

  /// Every plateau cell meeting the unit square, grouped by family.
  std::vector<PlateauCell> cells() const {
    std::vector<PlateauCell> out;
    for (std::size_t k = 0; k < kFamilies; ++k) {
      const auto ps = families_[k].plateaus();
      for (const auto& px : ps)
        for (const auto& py : ps)
          out.push_back({k, px.index, py.index,
                         lambda_[0] * px.value + lambda_[1] * py.value,
                         {px.span.center(), py.span.center()}});
    }
    return out;
  }

 private:
  std::size_t level_;
  double gamma_;
  std::array<double, 2> lambda_;
  std::vector<Staircase> families_;
};

inline KAEmbedding build_embedding(std::size_t level, double gamma) {
  return KAEmbedding(level, gamma);
}

/// 2 x 5 Jacobian in the neuron basis: column k = (l1 phi_k'(x), l2 phi_k'(y)).
/// Points on a ramp endpoint of any family are rejected.
inline Matrix embedding_jacobian(const KAEmbedding& emb, const Point& x) {
  if (emb.on_boundary(x))
    throw BoundaryPointError("embedding_jacobian: point lies on a piece boundary");
  Matrix jac(2, kFamilies);
  for (std::size_t k = 0; k < kFamilies; ++k) {
    jac(0, k) = emb.lambda()[0] * emb.family(k).derivative(x[0]);
    jac(1, k) = emb.lambda()[1] * emb.family(k).derivative(x[1]);
  }
  return jac;
}

/// Families whose plateaus contain both coordinates of x.
inline std::set<std::size_t> good_families(const KAEmbedding& emb, const Point& x) {
  std::set<std::size_t> out;
  for (std::size_t k = 0; k < kFamilies; ++k)
    if (!emb.family(k).in_gap(x[0]) && !emb.family(k).in_gap(x[1])) out.insert(k);
  return out;
}

/// Smallest distance between two plateau-cell values over all families.
/// Throws CollisionError below kCollisionTolerance.
inline double check_distinct_plateaus(const KAEmbedding& emb) {
  std::vector<double> values;
  for (const auto& c : emb.cells()) values.push_back(c.value);
  std::sort(values.begin(), values.end());
  double gap = INFINITY;
  for (std::size_t i = 1; i < values.size(); ++i) gap = std::min(gap, values[i] - values[i - 1]);
  if (gap < kCollisionTolerance)
    throw CollisionError("plateau values collide (minimum gap " + std::to_string(gap) +
                         "); change the level or lambda");
  return gap;
}

}  // namespace kamc::ka
