#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kamc/combinatorics.hpp"
#include "kamc/determinant.hpp"
#include "kamc/error.hpp"
#include "kamc/matrix.hpp"

namespace kamc {

/// Largest C(p,h) * C(q,h) that `minors` will enumerate.
inline constexpr std::size_t kMaxMinorCount = 1'000'000;

/// Row/column subsets selecting one h x h minor.
struct MinorIndex {
  Subset rows;
  Subset cols;
};

/// The h-th exterior power of a p x q matrix: every h x h minor, laid out
/// on a C(p,h) x C(q,h) grid whose row (column) index is the lexicographic
/// rank of the row (column) subset.
class MinorTable {
 public:
  MinorTable(std::size_t h, std::size_t source_rows, std::size_t source_cols,
             Matrix values)
      : h_(h), source_rows_(source_rows), source_cols_(source_cols),
        values_(std::move(values)) {
    if (values_.rows() != binomial(source_rows, h) ||
        values_.cols() != binomial(source_cols, h))
      throw DimensionError("MinorTable: grid does not match binomial counts");
  }

  std::size_t order() const noexcept { return h_; }
  std::size_t source_rows() const noexcept { return source_rows_; }
  std::size_t source_cols() const noexcept { return source_cols_; }
  std::size_t row_count() const noexcept { return values_.rows(); }
  std::size_t col_count() const noexcept { return values_.cols(); }
  std::size_t size() const noexcept { return values_.size(); }

  const Matrix& values() const noexcept { return values_; }
  double operator()(std::size_t r, std::size_t c) const { return values_(r, c); }

  double at(const MinorIndex& idx) const {
    if (idx.rows.size() != h_ || idx.cols.size() != h_)
      throw DimensionError("MinorTable::at: subset size differs from order");
    return values_(subset_rank(idx.rows, source_rows_),
                   subset_rank(idx.cols, source_cols_));
  }

  std::vector<Subset> row_subsets() const { return subsets(source_rows_, h_); }
  std::vector<Subset> col_subsets() const { return subsets(source_cols_, h_); }

 private:
  std::size_t h_;
  std::size_t source_rows_;
  std::size_t source_cols_;
  Matrix values_;
};

/// Cauchy-Binet: the exterior power of a product is the product of exterior
/// powers.
inline MinorTable operator*(const MinorTable& a, const MinorTable& b) {
  if (a.order() != b.order() || a.source_cols() != b.source_rows())
    throw DimensionError("MinorTable product: incompatible tables");
  return MinorTable(a.order(), a.source_rows(), b.source_cols(),
                    a.values() * b.values());
}

namespace detail {

inline void check_order(const Matrix& m, std::size_t h) {
  m.validate();
  if (h < 1 || h > std::min(m.rows(), m.cols()))
    throw DimensionError("minor order " + std::to_string(h) +
                         " outside [1, " +
                         std::to_string(std::min(m.rows(), m.cols())) + "]");
  const std::size_t nr = binomial(m.rows(), h);
  const std::size_t nc = binomial(m.cols(), h);
  if (nr > kMaxMinorCount || nc > kMaxMinorCount / nr)
    throw CapacityError("minor table of " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + " at order " +
                        std::to_string(h) + " exceeds " +
                        std::to_string(kMaxMinorCount) + " entries");
}

/// sqrt(sum x^2) / sum |x|, or nullopt when every x is zero.
template <typename Range>
std::optional<double> l2_over_l1(const Range& xs) {
  double scale = 0.0;
  for (double x : xs) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return std::nullopt;
  // Rescaling keeps the squares away from overflow for large minors.
  double l1 = 0.0, l2sq = 0.0;
  for (double x : xs) {
    const double y = std::abs(x) / scale;
    l1 += y;
    l2sq += y * y;
  }
  return std::sqrt(l2sq) / l1;
}

}  // namespace detail

/// All h x h minors of `m`.
inline MinorTable minors(const Matrix& m, std::size_t h) {
  detail::check_order(m, h);
  const auto rs = subsets(m.rows(), h);
  const auto cs = subsets(m.cols(), h);
  Matrix grid(rs.size(), cs.size());
  std::vector<double> sub(h * h);
  for (std::size_t ri = 0; ri < rs.size(); ++ri) {
    for (std::size_t ci = 0; ci < cs.size(); ++ci) {
      for (std::size_t a = 0; a < h; ++a)
        for (std::size_t b = 0; b < h; ++b) sub[a * h + b] = m(rs[ri][a], cs[ci][b]);
      grid(ri, ci) = h <= 3 ? detail::small_determinant(sub.data(), h)
                            : detail::lu_determinant(sub, h);
    }
  }
  return MinorTable(h, m.rows(), m.cols(), std::move(grid));
}

/// Minor concentration of a table: L2/L1 of the absolute minors.
/// nullopt is the degenerate outcome (every minor is zero).
inline std::optional<double> mc(const MinorTable& t) {
  return detail::l2_over_l1(t.values().data());
}

/// Minor concentration of `m` at order h.
inline std::optional<double> mc(const Matrix& m, std::size_t h) {
  return mc(minors(m, h));
}

enum class Axis { rows, cols };

struct GroupedConcentration {
  std::vector<double> masses;
  std::optional<double> concentration;  // nullopt when all masses vanish
};

/// Mass of a group = L1 norm of the absolute minors sharing one row subset
/// (Axis::rows) or one column subset (Axis::cols); concentration = L2/L1 of
/// the mass vector.
inline GroupedConcentration grouped_concentration(const MinorTable& t, Axis axis) {
  const Matrix& v = t.values();
  GroupedConcentration out;
  out.masses.assign(axis == Axis::rows ? v.rows() : v.cols(), 0.0);
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c)
      out.masses[axis == Axis::rows ? r : c] += std::abs(v(r, c));
  out.concentration = detail::l2_over_l1(out.masses);
  return out;
}

/// Global and grouped concentration of one matrix at one order.
struct MCReport {
  std::size_t h = 0;
  std::optional<double> mc_global;
  std::vector<double> row_group_masses;
  std::vector<double> col_group_masses;
  std::optional<double> row_concentration;
  std::optional<double> col_concentration;
  double max_abs_minor = 0.0;
  std::size_t total_minor_count = 0;

  bool degenerate() const noexcept { return !mc_global.has_value(); }
};

inline MCReport mc_report(const MinorTable& t) {
  MCReport r;
  r.h = t.order();
  r.mc_global = mc(t);
  auto rows = grouped_concentration(t, Axis::rows);
  auto cols = grouped_concentration(t, Axis::cols);
  r.row_group_masses = std::move(rows.masses);
  r.row_concentration = rows.concentration;
  r.col_group_masses = std::move(cols.masses);
  r.col_concentration = cols.concentration;
  r.max_abs_minor = max_abs(t.values());
  r.total_minor_count = t.size();
  return r;
}

inline MCReport mc_report(const Matrix& m, std::size_t h) {
  return mc_report(minors(m, h));
}

}  // namespace kamc
