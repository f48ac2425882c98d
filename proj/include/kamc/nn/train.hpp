#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "kamc/error.hpp"
#include "kamc/nn/mlp.hpp"
#include "kamc/random.hpp"

namespace kamc::nn {

struct Sample {
  Vector input;
  Vector target;

  friend bool operator==(const Sample&, const Sample&) = default;
};

using Dataset = std::vector<Sample>;

inline void check_dataset(const MLP& net, const Dataset& data) {
  if (data.empty()) throw ConfigError("dataset", "must not be empty");
  for (const auto& s : data)
    if (s.input.size() != net.width(0) || s.target.size() != net.width(net.depth()))
      throw DimensionError("dataset: sample shape does not match network");
}

/// Mean over outputs of the squared error of one sample.
inline double squared_error(const Vector& out, const Vector& target) {
  double s = 0.0;
  for (std::size_t r = 0; r < out.size(); ++r) s += (out[r] - target[r]) * (out[r] - target[r]);
  return s / static_cast<double>(out.size());
}

/// MSE loss over a dataset: mean over samples of squared_error.
inline double mse_loss(const MLP& net, const Dataset& data) {
  double s = 0.0;
  for (const auto& sample : data) s += squared_error(forward(net, sample.input).output(), sample.target);
  return s / static_cast<double>(data.size());
}

/// Parameter-shaped gradient buffers.
struct Gradient {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

inline Gradient zero_gradient(const MLP& net) {
  Gradient g;
  for (std::size_t j = 1; j <= net.depth(); ++j) {
    g.weights.emplace_back(net.weight(j).rows(), net.weight(j).cols());
    g.biases.emplace_back(net.bias(j).size(), 0.0);
  }
  return g;
}

/// Backpropagate the MSE of a batch; returns the batch loss.
inline double accumulate_gradient(const MLP& net, const Dataset& data,
                                  const std::vector<std::size_t>& batch, Gradient& grad) {
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t idx : batch) {
    const Sample& s = data[idx];
    const ActivationTrace t = forward(net, s.input);
    loss += squared_error(t.output(), s.target);

    const std::size_t L = net.depth();
    const double out_scale = 2.0 * scale / static_cast<double>(t.output().size());
    Vector delta(t.output().size());
    for (std::size_t r = 0; r < delta.size(); ++r)
      delta[r] = out_scale * (t.output()[r] - s.target[r]) *
                 activate_derivative(net.activation(L), t.pre[L][r]);

    for (std::size_t j = L; j >= 1; --j) {
      const Vector& prev = t.post[j - 1];
      Matrix& gw = grad.weights[j - 1];
      for (std::size_t r = 0; r < delta.size(); ++r) {
        grad.biases[j - 1][r] += delta[r];
        for (std::size_t c = 0; c < prev.size(); ++c) gw(r, c) += delta[r] * prev[c];
      }
      if (j == 1) break;
      const Matrix& w = net.weight(j);
      Vector next(prev.size(), 0.0);
      for (std::size_t c = 0; c < prev.size(); ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < delta.size(); ++r) sum += w(r, c) * delta[r];
        next[c] = sum * activate_derivative(net.activation(j - 1), t.pre[j - 1][c]);
      }
      delta = std::move(next);
    }
  }
  return loss * scale;
}

inline void apply_gradient(MLP& net, const Gradient& grad, double learning_rate) {
  if (learning_rate == 0.0) return;
  for (std::size_t j = 1; j <= net.depth(); ++j) {
    auto w = net.weight(j).data();
    auto gw = grad.weights[j - 1].data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= learning_rate * gw[k];
    auto& b = net.bias(j);
    for (std::size_t k = 0; k < b.size(); ++k) b[k] -= learning_rate * grad.biases[j - 1][k];
  }
}

struct SgdOptions {
  double learning_rate = 0.1;
  std::size_t batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;      // shuffling stream; unused for full batch
};

/// Stateful epoch runner. Keeps the shuffle stream between epochs so that
/// running N epochs one at a time matches one N-epoch run bit for bit.
class SgdTrainer {
 public:
  SgdTrainer(const Dataset& data, SgdOptions options)
      : data_(&data), options_(options), rng_(options.seed), order_(data.size()) {
    if (data.empty()) throw ConfigError("dataset", "must not be empty");
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }

  /// One pass over the data; returns the mean of the batch losses.
  double epoch(MLP& net) {
    check_dataset(net, *data_);
    const std::size_t n = data_->size();
    const std::size_t bs =
        options_.batch_size == 0 ? n : std::min(options_.batch_size, n);
    if (bs < n) {
      for (std::size_t i = n - 1; i > 0; --i) std::swap(order_[i], order_[rng_.index(i + 1)]);
    }
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += bs) {
      std::vector<std::size_t> batch(order_.begin() + static_cast<std::ptrdiff_t>(start),
                                     order_.begin() + static_cast<std::ptrdiff_t>(std::min(start + bs, n)));
      Gradient g = zero_gradient(net);
      total += accumulate_gradient(net, *data_, batch, g);
      apply_gradient(net, g, options_.learning_rate);
      ++batches;
    }
    return total / static_cast<double>(batches);
  }

 private:
  const Dataset* data_;
  SgdOptions options_;
  Rng rng_;
  std::vector<std::size_t> order_;
};

/// Plain gradient descent on the MSE; returns the per-epoch mean loss.
inline std::vector<double> train_sgd(MLP& net, const Dataset& data, std::size_t epochs,
                                     const SgdOptions& options) {
  check_dataset(net, data);
  SgdTrainer trainer(data, options);
  std::vector<double> history;
  history.reserve(epochs);
  for (std::size_t e = 0; e < epochs; ++e) history.push_back(trainer.epoch(net));
  return history;
}

}  // namespace kamc::nn
