#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "kamc/error.hpp"
#include "kamc/ka/embedding.hpp"
#include "kamc/ka/target.hpp"

namespace kamc::ka {

/// Piecewise-linear g: R -> R through (t_i, v_i), constant beyond the ends.
class OuterFunction {
 public:
  OuterFunction() = default;

  OuterFunction(std::vector<double> breakpoints, std::vector<double> values)
      : t_(std::move(breakpoints)), v_(std::move(values)) {
    if (t_.empty() || t_.size() != v_.size())
      throw DimensionError("OuterFunction: need matching nonempty breakpoints and values");
    for (std::size_t i = 1; i < t_.size(); ++i)
      if (!(t_[i] > t_[i - 1]))
        throw CollisionError("OuterFunction: breakpoints must be strictly increasing");
  }

  /// g = 0 on the sorted plateau-cell values of `emb`.
  static OuterFunction zero_on(const KAEmbedding& emb) {
    std::vector<double> t;
    for (const auto& c : emb.cells()) t.push_back(c.value);
    std::sort(t.begin(), t.end());
    std::vector<double> v(t.size(), 0.0);
    return OuterFunction(std::move(t), std::move(v));
  }

  const std::vector<double>& breakpoints() const noexcept { return t_; }
  const std::vector<double>& values() const noexcept { return v_; }
  std::vector<double>& values() noexcept { return v_; }

  double operator()(double x) const {
    if (t_.empty()) return 0.0;
    if (x <= t_.front()) return v_.front();
    if (x >= t_.back()) return v_.back();
    const auto it = std::upper_bound(t_.begin(), t_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin());
    const double w = (x - t_[i - 1]) / (t_[i] - t_[i - 1]);
    return v_[i - 1] + w * (v_[i] - v_[i - 1]);
  }

  friend bool operator==(const OuterFunction&, const OuterFunction&) = default;

 private:
  std::vector<double> t_;
  std::vector<double> v_;
};

/// Square grid of (n x n) points on [0,1]^2 with Phi cached.
struct EvaluationGrid {
  std::size_t nodes = 0;
  std::vector<Point> points;
  std::vector<EmbeddingValue> phi;
};

inline EvaluationGrid evaluation_grid(const KAEmbedding& emb, std::size_t nodes) {
  if (nodes < 2) throw ConfigError("gridSize", "need at least 2 nodes per axis");
  EvaluationGrid g;
  g.nodes = nodes;
  const double h = 1.0 / static_cast<double>(nodes - 1);
  for (std::size_t i = 0; i < nodes; ++i)
    for (std::size_t j = 0; j < nodes; ++j) {
      const Point p{static_cast<double>(i) * h, static_cast<double>(j) * h};
      g.points.push_back(p);
      g.phi.push_back(emb(p));
    }
  return g;
}

/// f(x) - sum_k g(Phi_k(x)).
inline double residual(const OuterFunction& g, const TargetFunction& f, const Point& x,
                       const EmbeddingValue& phi) {
  double s = 0.0;
  for (double v : phi) s += g(v);
  return f(x[0], x[1]) - s;
}

inline std::vector<double> residuals(const OuterFunction& g, const TargetFunction& f,
                                     const EvaluationGrid& grid) {
  std::vector<double> e(grid.points.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = residual(g, f, grid.points[i], grid.phi[i]);
  return e;
}

inline double sup_norm(const std::vector<double>& e) {
  double s = 0.0;
  for (double v : e) s = std::max(s, std::abs(v));
  return s;
}

struct OuterIterationOptions {
  /// Each plateau cell's breakpoint moves by residual(center) / divisor;
  /// n + 1 = 3 for the planar embedding.
  double increment_divisor = 3.0;
};

struct OuterStep {
  OuterFunction next;
  std::vector<double> residuals;  // e_{t+1} on the evaluation grid
  double sup_error = 0.0;
};

/// One correction of g from the residual at every plateau-cell center.
inline OuterStep outer_iteration_step(const KAEmbedding& emb, const OuterFunction& g,
                                      const TargetFunction& f, const EvaluationGrid& grid,
                                      const OuterIterationOptions& options = {}) {
  if (!(options.increment_divisor > 0.0))
    throw ConfigError("incrementDivisor", "must be positive");
  check_distinct_plateaus(emb);
  auto cells = emb.cells();
  std::sort(cells.begin(), cells.end(),
            [](const PlateauCell& a, const PlateauCell& b) { return a.value < b.value; });
  const auto& t = g.breakpoints();
  if (t.size() != cells.size())
    throw DimensionError("outer_iteration_step: g is not defined on the embedding's cells");

  OuterStep out;
  std::vector<double> values = g.values();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (std::abs(t[i] - cells[i].value) > kCollisionTolerance)
      throw CollisionError("outer_iteration_step: breakpoint does not match its cell value");
    const Point& c = cells[i].center;
    values[i] += residual(g, f, c, emb(c)) / options.increment_divisor;
  }
  out.next = OuterFunction(t, std::move(values));
  out.residuals = residuals(out.next, f, grid);
  out.sup_error = sup_norm(out.residuals);
  return out;
}

/// 2 * omega_f(sigma): residual level below which a fixed-level embedding
/// cannot resolve f.
inline double resolution_floor(const TargetFunction& f, const KAEmbedding& emb) {
  return 2.0 * f.modulus(emb.sigma());
}

/// Default stopping floor of `represent`: 2 * omega_f(sigma * (1 + lambda_2)).
inline double stopping_floor(const TargetFunction& f, const KAEmbedding& emb) {
  return 2.0 * f.modulus(emb.sigma() * (1.0 + emb.lambda()[1]));
}

struct IterationReport {
  std::vector<double> errors;  // e_0 = sup |f|, e_1, ...
  std::vector<double> ratios;  // e_{t+1} / e_t
  double floor = 0.0;
  bool reached_floor = false;
  std::optional<std::size_t> non_contraction;  // t with e_{t+1} > e_t above the floor

  std::size_t iterations() const noexcept { return ratios.size(); }
};

struct Representation {
  OuterFunction g;
  IterationReport report;
};

struct RepresentOptions {
  std::size_t max_iterations = 25;
  std::optional<double> floor;  // default: stopping_floor(f, emb)
  OuterIterationOptions step;
};

/// Iterate from g_0 = 0 until the sup error reaches the floor, the iteration
/// budget runs out, or the error grows (non-contraction alarm, which stops
/// the run).
inline Representation represent(const KAEmbedding& emb, const TargetFunction& f,
                                const EvaluationGrid& grid, const RepresentOptions& options = {}) {
  Representation out;
  out.g = OuterFunction::zero_on(emb);
  auto& rep = out.report;
  rep.floor = options.floor.value_or(stopping_floor(f, emb));
  rep.errors.push_back(sup_norm(residuals(out.g, f, grid)));
  for (std::size_t t = 0; t < options.max_iterations; ++t) {
    const double current = rep.errors.back();
    if (current <= rep.floor) break;
    OuterStep step = outer_iteration_step(emb, out.g, f, grid, options.step);
    rep.errors.push_back(step.sup_error);
    rep.ratios.push_back(step.sup_error / current);
    out.g = std::move(step.next);
    if (step.sup_error > current) {
      rep.non_contraction = t;
      break;
    }
  }
  rep.reached_floor = rep.errors.back() <= rep.floor;
  return out;
}

}  // namespace kamc::ka
