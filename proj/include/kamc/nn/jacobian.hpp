#pragma once

#include <span>
#include <string>

#include "kamc/error.hpp"
#include "kamc/matrix.hpp"
#include "kamc/nn/mlp.hpp"

namespace kamc::nn {

// Jacobian convention (used for every Jacobian in the library): rows index
// source-layer neurons, columns index target-layer neurons, and entry (a, b)
// is d(target neuron b) / d(source neuron a). A map from layer i to layer j
// therefore has an n_i x n_j Jacobian, and composites multiply left to right:
// J(i -> k) = J(i -> j) * J(j -> k).

/// d a_j / d a_{j-1} at the traced point, shape n_{j-1} x n_j.
inline Matrix layer_jacobian(const MLP& net, const ActivationTrace& trace, std::size_t j) {
  if (j < 1 || j > net.depth())
    throw DimensionError("layer_jacobian: layer " + std::to_string(j) + " outside [1, " +
                         std::to_string(net.depth()) + "]");
  const Matrix& w = net.weight(j);
  const Vector& z = trace.pre.at(j);
  Matrix jac(w.cols(), w.rows());
  for (std::size_t b = 0; b < w.rows(); ++b) {
    const double slope = activate_derivative(net.activation(j), z[b]);
    for (std::size_t a = 0; a < w.cols(); ++a) jac(a, b) = slope * w(b, a);
  }
  return jac;
}

inline void check_layer_pair(const MLP& net, std::size_t i, std::size_t j) {
  if (!(i < j && j <= net.depth()))
    throw DimensionError("layer pair (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") invalid for depth " + std::to_string(net.depth()));
}

/// Jacobian of the map from layer i to layer j (post-activation) along a trace.
inline Matrix jacobian_between(const MLP& net, const ActivationTrace& trace, std::size_t i,
                               std::size_t j) {
  check_layer_pair(net, i, j);
  Matrix jac = layer_jacobian(net, trace, i + 1);
  for (std::size_t k = i + 2; k <= j; ++k) jac = jac * layer_jacobian(net, trace, k);
  return jac;
}

inline Matrix jacobian_between(const MLP& net, std::span<const double> x, std::size_t i,
                               std::size_t j) {
  return jacobian_between(net, forward(net, x), i, j);
}

/// Central-difference estimate of jacobian_between. For i > 0 the stored
/// post-activation a_i is perturbed and pushed forward from layer i + 1.
inline Matrix finite_diff_jacobian(const MLP& net, std::span<const double> x, std::size_t i,
                                   std::size_t j, double step) {
  check_layer_pair(net, i, j);
  if (!(step > 0.0)) throw ConfigError("step", "must be positive");
  const ActivationTrace trace = forward(net, x);
  const Vector& base = trace.post[i];
  Matrix jac(base.size(), net.width(j));
  for (std::size_t a = 0; a < base.size(); ++a) {
    Vector plus = base, minus = base;
    plus[a] += step;
    minus[a] -= step;
    const Vector up = propagate(net, std::move(plus), i, j);
    const Vector down = propagate(net, std::move(minus), i, j);
    for (std::size_t b = 0; b < up.size(); ++b) jac(a, b) = (up[b] - down[b]) / (2.0 * step);
  }
  return jac;
}

}  // namespace kamc::nn
