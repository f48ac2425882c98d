#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kamc/error.hpp"
#include "kamc/exterior.hpp"
#include "kamc/nn/jacobian.hpp"
#include "kamc/nn/mlp.hpp"

namespace kamc::training {

using nn::MLP;
using nn::Vector;

/// Mean minor concentration of J(source -> target) at order h over a fixed
/// set of probe inputs.
struct MCObjectiveSpec {
  std::size_t source_layer = 0;
  std::size_t target_layer = 1;
  std::size_t h = 1;
  std::vector<Vector> probe_points;

  void validate(const MLP& net) const {
    if (!(source_layer < target_layer && target_layer <= net.depth()))
      throw ConfigError("objective.targetLayer", "need 0 <= sourceLayer < targetLayer <= depth");
    const std::size_t cap = std::min(net.width(source_layer), net.width(target_layer));
    if (h < 1 || h > cap)
      throw ConfigError("objective.h", "must lie in [1, " + std::to_string(cap) + "]");
    if (probe_points.empty()) throw ConfigError("objective.probePoints", "must not be empty");
    for (const auto& p : probe_points)
      if (p.size() != net.width(0))
        throw DimensionError("objective: probe point has wrong dimension");
  }
};

struct ObjectiveValue {
  std::optional<double> value;  // nullopt: every probe point was degenerate
  std::size_t degenerate_count = 0;
  std::size_t point_count = 0;
};

/// Degenerate points are dropped from the mean and counted.
inline ObjectiveValue mc_objective(const MLP& net, const MCObjectiveSpec& spec) {
  spec.validate(net);
  ObjectiveValue out;
  out.point_count = spec.probe_points.size();
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& y : spec.probe_points) {
    const Matrix jac = nn::jacobian_between(net, y, spec.source_layer, spec.target_layer);
    if (auto v = mc(jac, spec.h)) {
      sum += *v;
      ++used;
    } else {
      ++out.degenerate_count;
    }
  }
  if (used > 0) out.value = sum / static_cast<double>(used);
  return out;
}

/// How an MC ascent step is taken.
struct MCStepConfig {
  double delta_prime = 0.0;
  std::set<std::size_t> parameter_scope;  // weight layers; empty = {target layer}
  double fd_step = 1e-4;

  std::set<std::size_t> resolved_scope(const MCObjectiveSpec& spec) const {
    std::set<std::size_t> scope = parameter_scope;
    if (scope.empty()) scope.insert(spec.target_layer);
    for (std::size_t j : scope)
      if (j <= spec.source_layer || j > spec.target_layer)
        throw ConfigError("mcStep.parameterScope",
                          "layer " + std::to_string(j) + " outside the probed span");
    if (!(fd_step > 0.0)) throw ConfigError("mcStep.fdStep", "must be positive");
    return scope;
  }
};

/// d(objective)/d(W_j) for each weight layer j in scope.
using WeightGradient = std::map<std::size_t, Matrix>;

inline double gradient_norm(const WeightGradient& g) {
  double s = 0.0;
  for (const auto& [j, m] : g)
    for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

namespace detail {

inline double objective_or_throw(const MLP& net, const MCObjectiveSpec& spec) {
  auto v = mc_objective(net, spec);
  if (!v.value) throw DegenerateError("MC objective is degenerate at every probe point");
  return *v.value;
}

}  // namespace detail

/// Central finite-difference gradient of mc_objective with respect to every
/// weight in scope, with per-entry step fd_step * (1 + |w|). Weights outside
/// the scope are never touched.
inline WeightGradient mc_gradient(const MLP& net, const MCObjectiveSpec& spec,
                                  const MCStepConfig& step) {
  const auto scope = step.resolved_scope(spec);
  detail::objective_or_throw(net, spec);
  MLP probe = net;
  WeightGradient grad;
  for (std::size_t j : scope) {
    Matrix g(net.weight(j).rows(), net.weight(j).cols());
    auto w = probe.weight(j).data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double original = w[k];
      const double h = step.fd_step * (1.0 + std::abs(original));
      w[k] = original + h;
      const double up = detail::objective_or_throw(probe, spec);
      w[k] = original - h;
      const double down = detail::objective_or_throw(probe, spec);
      w[k] = original;
      g.data()[k] = (up - down) / (2.0 * h);
    }
    grad.emplace(j, std::move(g));
  }
  return grad;
}

/// w <- w + delta_prime * g on the layers present in `grad`.
inline void mc_step(MLP& net, const WeightGradient& grad, double delta_prime) {
  for (const auto& [j, g] : grad) {
    if (j < 1 || j > net.depth() || g.rows() != net.weight(j).rows() ||
        g.cols() != net.weight(j).cols())
      throw DimensionError("mc_step: gradient for layer " + std::to_string(j) +
                           " does not match the weights");
  }
  if (delta_prime == 0.0) return;
  for (const auto& [j, g] : grad) {
    auto w = net.weight(j).data();
    auto gd = g.data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += delta_prime * gd[k];
  }
}

}  // namespace kamc::training
