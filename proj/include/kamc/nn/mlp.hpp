#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kamc/error.hpp"
#include "kamc/matrix.hpp"
#include "kamc/random.hpp"

namespace kamc::nn {

using Vector = std::vector<double>;

enum class Activation { identity, tanh, softplus };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::softplus: return "softplus";
  }
  return "?";
}

inline Activation parse_activation(std::string_view s) {
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh;
  if (s == "softplus") return Activation::softplus;
  throw ConfigError("activationKinds", "unknown activation '" + std::string(s) + "'");
}

inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::tanh: return std::tanh(z);
    case Activation::softplus:
      // log(1 + e^z) without overflow for large z.
      return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  return z;
}

inline double activate_derivative(Activation a, double z) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::softplus:
      return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  }
  return 1.0;
}

/// Architecture and initialization of a dense feedforward network.
/// `layer_sizes` = [n0, ..., nL]; `activations[j-1]` applies to layer j.
struct MLPConfig {
  std::vector<std::size_t> layer_sizes;
  std::vector<Activation> activations;
  std::string init_scheme = "xavier-uniform";
  std::uint64_t seed = 0;

  std::size_t depth() const noexcept { return layer_sizes.empty() ? 0 : layer_sizes.size() - 1; }

  void validate() const {
    if (layer_sizes.size() < 2) throw ConfigError("layerSizes", "need at least two layers");
    for (auto n : layer_sizes)
      if (n < 1) throw ConfigError("layerSizes", "every size must be >= 1");
    if (activations.size() != depth())
      throw ConfigError("activationKinds", "expected " + std::to_string(depth()) + " entries");
    if (init_scheme != "xavier-uniform")
      throw ConfigError("initScheme", "only xavier-uniform is supported");
  }

  friend bool operator==(const MLPConfig&, const MLPConfig&) = default;
};

/// Weights W_j are n_j x n_{j-1} (so z_j = W_j a_{j-1} + b_j), for j = 1..L,
/// stored at index j-1.
struct MLP {
  MLPConfig config;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  std::size_t depth() const noexcept { return weights.size(); }
  std::size_t width(std::size_t layer) const { return config.layer_sizes.at(layer); }

  Matrix& weight(std::size_t j) { return weights.at(j - 1); }
  const Matrix& weight(std::size_t j) const { return weights.at(j - 1); }
  Vector& bias(std::size_t j) { return biases.at(j - 1); }
  const Vector& bias(std::size_t j) const { return biases.at(j - 1); }
  Activation activation(std::size_t j) const { return config.activations.at(j - 1); }

  /// Shapes agree with the config and every parameter is finite.
  void validate() const {
    config.validate();
    if (weights.size() != config.depth() || biases.size() != config.depth())
      throw DimensionError("MLP: layer count differs from config");
    for (std::size_t j = 1; j <= depth(); ++j) {
      const Matrix& w = weight(j);
      if (w.rows() != width(j) || w.cols() != width(j - 1) || bias(j).size() != width(j))
        throw DimensionError("MLP: layer " + std::to_string(j) + " has wrong shape");
      w.validate();
      for (double b : bias(j))
        if (!std::isfinite(b)) throw DimensionError("MLP: non-finite bias");
    }
  }

  friend bool operator==(const MLP&, const MLP&) = default;
};

/// Xavier-uniform bound sqrt(6 / (fan_in + fan_out)).
inline double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

/// Xavier-uniform weights, zero biases. Layers are filled in order from a
/// single Rng(seed) stream, each weight matrix in row-major order.
inline MLP init_mlp(const MLPConfig& config) {
  config.validate();
  MLP net;
  net.config = config;
  Rng rng(config.seed);
  for (std::size_t j = 1; j <= config.depth(); ++j) {
    const std::size_t in = config.layer_sizes[j - 1];
    const std::size_t out = config.layer_sizes[j];
    const double bound = xavier_bound(in, out);
    Matrix w(out, in);
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(out, 0.0);
  }
  return net;
}

/// Pre- and post-activation values of one forward pass.
/// post[0] is the input; pre[j] is defined for j >= 1 (pre[0] is empty).
struct ActivationTrace {
  std::vector<Vector> pre;
  std::vector<Vector> post;

  const Vector& input() const { return post.front(); }
  const Vector& output() const { return post.back(); }
};

/// z = W a + b for layer j.
inline Vector affine(const MLP& net, std::size_t j, std::span<const double> a) {
  const Matrix& w = net.weight(j);
  Vector z = net.bias(j);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) s += w(r, c) * a[c];
    z[r] += s;
  }
  return z;
}

/// Propagate post-activation values `a` of layer `from` up to layer `to`.
inline Vector propagate(const MLP& net, Vector a, std::size_t from, std::size_t to) {
  for (std::size_t j = from + 1; j <= to; ++j) {
    Vector z = affine(net, j, a);
    for (double& v : z) v = activate(net.activation(j), v);
    a = std::move(z);
  }
  return a;
}

inline ActivationTrace forward(const MLP& net, std::span<const double> x) {
  if (x.size() != net.width(0))
    throw DimensionError("forward: input has " + std::to_string(x.size()) +
                         " entries, network expects " + std::to_string(net.width(0)));
  ActivationTrace trace;
  trace.pre.reserve(net.depth() + 1);
  trace.post.reserve(net.depth() + 1);
  trace.pre.emplace_back();
  trace.post.emplace_back(x.begin(), x.end());
  for (std::size_t j = 1; j <= net.depth(); ++j) {
    Vector z = affine(net, j, trace.post.back());
    Vector a(z.size());
    for (std::size_t r = 0; r < z.size(); ++r) a[r] = activate(net.activation(j), z[r]);
    trace.pre.push_back(std::move(z));
    trace.post.push_back(std::move(a));
  }
  return trace;
}

}  // namespace kamc::nn
