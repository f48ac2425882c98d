#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "kamc/error.hpp"
#include "kamc/matrix.hpp"

namespace kamc::ka {

/// A continuous f: [0,1]^2 -> R with a known modulus of continuity
/// (sup metric): either a catalog entry or a bilinearly interpolated grid.
class TargetFunction {
 public:
  enum class Kind { zero, constant, sum, product, sine, grid };

  static TargetFunction zero() { return TargetFunction(Kind::zero); }
  static TargetFunction constant(double c) {
    TargetFunction f(Kind::constant);
    f.constant_ = c;
    return f;
  }
  static TargetFunction sum() { return TargetFunction(Kind::sum); }
  static TargetFunction product() { return TargetFunction(Kind::product); }
  static TargetFunction sine() { return TargetFunction(Kind::sine); }

  /// Samples at nodes (i / (rows - 1), j / (cols - 1)).
  static TargetFunction gridded(Matrix samples) {
    if (samples.rows() < 2 || samples.cols() < 2)
      throw ConfigError("target.grid", "need at least 2 x 2 samples");
    samples.validate();
    TargetFunction f(Kind::grid);
    f.grid_ = std::move(samples);
    return f;
  }

  static TargetFunction sample(const TargetFunction& f, std::size_t nodes) {
    Matrix s(nodes, nodes);
    const double h = 1.0 / static_cast<double>(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i)
      for (std::size_t j = 0; j < nodes; ++j)
        s(i, j) = f(static_cast<double>(i) * h, static_cast<double>(j) * h);
    return gridded(std::move(s));
  }

  /// Catalog names: zero, constant, sum, product, sine.
  static TargetFunction from_name(std::string_view name, double c = 1.0) {
    if (name == "zero") return zero();
    if (name == "constant") return constant(c);
    if (name == "sum") return sum();
    if (name == "product") return product();
    if (name == "sine") return sine();
    throw ConfigError("target", "unknown target '" + std::string(name) + "'");
  }

  Kind kind() const noexcept { return kind_; }
  double constant_value() const noexcept { return constant_; }
  const Matrix& grid() const noexcept { return grid_; }

  std::string name() const {
    switch (kind_) {
      case Kind::zero: return "zero";
      case Kind::constant: return "constant";
      case Kind::sum: return "sum";
      case Kind::product: return "product";
      case Kind::sine: return "sine";
      case Kind::grid: return "grid";
    }
    return "?";
  }

  double operator()(double x, double y) const {
    switch (kind_) {
      case Kind::zero: return 0.0;
      case Kind::constant: return constant_;
      case Kind::sum: return x + y;
      case Kind::product: return x * y;
      case Kind::sine: return std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
      case Kind::grid: return bilinear(x, y);
    }
    return 0.0;
  }

  /// omega_f(d) = sup |f(p) - f(q)| over ||p - q||_inf <= d. Exact for the
  /// catalog; for grids, the largest difference between nodes within d.
  double modulus(double d) const {
    d = std::max(d, 0.0);
    switch (kind_) {
      case Kind::zero:
      case Kind::constant: return 0.0;
      case Kind::sum: return std::min(2.0 * d, 2.0);
      case Kind::product: return d >= 1.0 ? 1.0 : 2.0 * d - d * d;
      case Kind::sine: return d >= 0.5 ? 1.0 : std::sin(std::numbers::pi * d);
      case Kind::grid: return grid_modulus(d);
    }
    return 0.0;
  }

 private:
  explicit TargetFunction(Kind k) : kind_(k) {}

  double bilinear(double x, double y) const {
    const double fx = std::clamp(x, 0.0, 1.0) * static_cast<double>(grid_.rows() - 1);
    const double fy = std::clamp(y, 0.0, 1.0) * static_cast<double>(grid_.cols() - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(fx), grid_.rows() - 2);
    const std::size_t j = std::min(static_cast<std::size_t>(fy), grid_.cols() - 2);
    const double tx = fx - static_cast<double>(i);
    const double ty = fy - static_cast<double>(j);
    return (1 - tx) * (1 - ty) * grid_(i, j) + tx * (1 - ty) * grid_(i + 1, j) +
           (1 - tx) * ty * grid_(i, j + 1) + tx * ty * grid_(i + 1, j + 1);
  }

  double grid_modulus(double d) const {
    const auto reach = [&](std::size_t n) {
      return static_cast<std::size_t>(std::floor(d * static_cast<double>(n - 1) + 1e-9));
    };
    const std::size_t ri = reach(grid_.rows());
    const std::size_t rj = reach(grid_.cols());
    double best = 0.0;
    for (std::size_t i = 0; i < grid_.rows(); ++i)
      for (std::size_t j = 0; j < grid_.cols(); ++j)
        for (std::size_t di = 0; di <= ri && i + di < grid_.rows(); ++di)
          for (std::size_t dj = 0; dj <= rj && j + dj < grid_.cols(); ++dj) {
            best = std::max(best, std::abs(grid_(i + di, j + dj) - grid_(i, j)));
            if (j >= dj) best = std::max(best, std::abs(grid_(i + di, j - dj) - grid_(i, j)));
          }
    return best;
  }

  Kind kind_;
  double constant_ = 0.0;
  Matrix grid_;
};

}  // namespace kamc::ka
