#include <gtest/gtest.h>

#include <cmath>

#include "kamc/exterior.hpp"
#include "kamc/nn/jacobian.hpp"
#include "kamc/nn/mlp.hpp"
#include "kamc/nn/train.hpp"

using namespace kamc;
using namespace kamc::nn;

namespace {

MLP make(std::vector<std::size_t> sizes, std::vector<Activation> acts, std::uint64_t seed) {
  MLPConfig c;
  c.layer_sizes = std::move(sizes);
  c.activations = std::move(acts);
  c.seed = seed;
  return init_mlp(c);
}

Vector random_point(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Vector x(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

constexpr auto I = Activation::identity;
constexpr auto T = Activation::tanh;
constexpr auto S = Activation::softplus;

}  // namespace

TEST(Activation, ParseAndPrint) {
  for (auto a : {I, T, S}) EXPECT_EQ(parse_activation(to_string(a)), a);
  EXPECT_THROW(parse_activation("relu"), ConfigError);
}

TEST(Activation, SoftplusStableForLargeInputs) {
  EXPECT_NEAR(activate(S, 800.0), 800.0, 1e-12);
  EXPECT_NEAR(activate(S, -800.0), 0.0, 1e-300);
  EXPECT_NEAR(activate_derivative(S, 0.0), 0.5, 1e-15);
  EXPECT_TRUE(std::isfinite(activate_derivative(S, -800.0)));
}

TEST(Init, Deterministic) { EXPECT_EQ(make({3, 4, 2}, {T, S}, 5), make({3, 4, 2}, {T, S}, 5)); }

TEST(Init, Shapes) {
  const MLP net = make({2, 5, 1}, {T, I}, 1);
  EXPECT_EQ(net.weight(1).rows(), 5u);
  EXPECT_EQ(net.weight(1).cols(), 2u);
  EXPECT_EQ(net.weight(2).rows(), 1u);
  EXPECT_EQ(net.weight(2).cols(), 5u);
  EXPECT_EQ(net.bias(1), Vector(5, 0.0));
}

TEST(Init, XavierBoundRespected) {
  const double bound = std::sqrt(6.0 / 20.0);
  double seen = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const MLP net = make({10, 10}, {I}, seed);
    seen = std::max(seen, max_abs(net.weight(1)));
  }
  EXPECT_LE(seen, bound);
  EXPECT_GT(seen, 0.99 * bound);
}

TEST(Init, InvalidConfigRejected) {
  EXPECT_THROW(make({3}, {}, 0), ConfigError);
  EXPECT_THROW(make({3, 0, 1}, {T, T}, 0), ConfigError);
  EXPECT_THROW(make({3, 2}, {T, T}, 0), ConfigError);
}

TEST(Forward, IdentityNetworkPassesInputThrough) {
  MLP net = make({3, 3, 3}, {I, I}, 0);
  net.weight(1) = Matrix::identity(3);
  net.weight(2) = Matrix::identity(3);
  const Vector x{0.25, -1.5, 3.0};
  EXPECT_EQ(forward(net, x).output(), x);
}

TEST(Forward, TanhAtOrigin) {
  const MLP net = make({4, 3}, {T}, 9);
  EXPECT_EQ(forward(net, Vector(4, 0.0)).output(), Vector(3, 0.0));
}

TEST(Forward, MatchesHandArithmetic) {
  MLP net = make({2, 3, 2}, {T, S}, 21);
  net.bias(1) = {0.1, -0.2, 0.3};
  net.bias(2) = {-0.5, 0.25};
  const Vector x{0.7, -0.4};
  const Matrix& w1 = net.weight(1);
  const Matrix& w2 = net.weight(2);
  Vector h(3), y(2);
  for (std::size_t r = 0; r < 3; ++r) h[r] = std::tanh(w1(r, 0) * x[0] + w1(r, 1) * x[1] + net.bias(1)[r]);
  for (std::size_t r = 0; r < 2; ++r) {
    const double z = w2(r, 0) * h[0] + w2(r, 1) * h[1] + w2(r, 2) * h[2] + net.bias(2)[r];
    y[r] = std::log1p(std::exp(z));
  }
  const auto t = forward(net, x);
  for (std::size_t r = 0; r < 2; ++r) EXPECT_NEAR(t.output()[r], y[r], 1e-15);
  EXPECT_EQ(t.post.size(), 3u);
  EXPECT_EQ(t.pre.size(), 3u);
}

TEST(Forward, DimensionMismatch) {
  const MLP net = make({2, 2}, {T}, 0);
  EXPECT_THROW(forward(net, Vector{1.0, 2.0, 3.0}), DimensionError);
}

TEST(LayerJacobian, IdentityActivationIsTransposedWeights) {
  const MLP net = make({3, 4}, {I}, 3);
  const auto t = forward(net, random_point(3, 1));
  EXPECT_EQ(layer_jacobian(net, t, 1), net.weight(1).transposed());
}

TEST(LayerJacobian, TanhAtZeroMatchesIdentityCase) {
  const MLP net = make({3, 4}, {T}, 3);
  const auto t = forward(net, Vector(3, 0.0));
  EXPECT_EQ(layer_jacobian(net, t, 1), net.weight(1).transposed());
}

TEST(LayerJacobian, SoftplusMatchesFiniteDifferences) {
  const MLP net = make({3, 5, 2}, {S, S}, 8);
  const Vector x = random_point(3, 2);
  const auto t = forward(net, x);
  for (std::size_t j = 1; j <= 2; ++j)
    EXPECT_LT(relative_difference(layer_jacobian(net, t, j), finite_diff_jacobian(net, x, j - 1, j, 1e-5)), 1e-6);
}

TEST(LayerJacobian, InvalidLayer) {
  const MLP net = make({3, 4}, {T}, 3);
  const auto t = forward(net, Vector(3, 0.0));
  EXPECT_THROW(layer_jacobian(net, t, 0), DimensionError);
  EXPECT_THROW(layer_jacobian(net, t, 2), DimensionError);
}

TEST(JacobianBetween, SingleStepEqualsLayerJacobian) {
  const MLP net = make({3, 4, 2}, {T, T}, 4);
  const Vector x = random_point(3, 3);
  const auto t = forward(net, x);
  EXPECT_EQ(jacobian_between(net, x, 1, 2), layer_jacobian(net, t, 2));
}

TEST(JacobianBetween, IdentityNetwork) {
  MLP net = make({3, 3, 3, 3}, {I, I, I}, 0);
  for (std::size_t j = 1; j <= 3; ++j) net.weight(j) = Matrix::identity(3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j <= 3; ++j) EXPECT_EQ(jacobian_between(net, Vector{1, 2, 3}, i, j), Matrix::identity(3));
}

TEST(JacobianBetween, ShapeAndInvalidPairs) {
  const MLP net = make({3, 5, 2}, {T, T}, 4);
  const Matrix j = jacobian_between(net, Vector(3, 0.1), 0, 2);
  EXPECT_EQ(j.rows(), 3u);
  EXPECT_EQ(j.cols(), 2u);
  EXPECT_THROW(jacobian_between(net, Vector(3, 0.1), 1, 1), DimensionError);
  EXPECT_THROW(jacobian_between(net, Vector(3, 0.1), 0, 3), DimensionError);
}

TEST(JacobianBetween, TanhComposite) {
  const MLP net = make({3, 6, 4, 2}, {T, T, T}, 17);
  const Vector x = random_point(3, 5);
  EXPECT_LT(relative_difference(jacobian_between(net, x, 0, 2), finite_diff_jacobian(net, x, 0, 2, 1e-5)), 1e-5);
}

TEST(FiniteDiff, LinearNetworkExact) {
  const MLP net = make({3, 4, 2}, {I, I}, 2);
  const Vector x = random_point(3, 7);
  EXPECT_LT(max_abs(jacobian_between(net, x, 0, 2) - finite_diff_jacobian(net, x, 0, 2, 1e-3)), 1e-10);
}

TEST(FiniteDiff, SecondOrderConvergence) {
  const MLP net = make({2, 4, 2}, {T, T}, 3);
  const Vector x = random_point(2, 1);
  const Matrix exact = jacobian_between(net, x, 0, 2);
  const double e1 = max_abs(finite_diff_jacobian(net, x, 0, 2, 1e-2) - exact);
  const double e2 = max_abs(finite_diff_jacobian(net, x, 0, 2, 5e-3) - exact);
  EXPECT_NEAR(e1 / e2, 4.0, 0.4);
}

TEST(FiniteDiff, TanhCrossCheck) {
  const MLP net = make({3, 5, 3}, {T, T}, 6);
  const Vector x = random_point(3, 9);
  for (std::size_t i = 0; i < 2; ++i)
    EXPECT_LT(relative_difference(jacobian_between(net, x, i, 2), finite_diff_jacobian(net, x, i, 2, 1e-5)), 1e-6);
}

TEST(FiniteDiff, RejectsNonPositiveStep) {
  const MLP net = make({2, 2}, {T}, 0);
  EXPECT_THROW(finite_diff_jacobian(net, Vector(2, 0.0), 0, 1, 0.0), ConfigError);
}

TEST(ChainRule, MatrixAndMinorLevel) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MLP net = make({4, 5, 4, 3}, {T, S, T}, seed);
    const Vector x = random_point(4, seed + 50);
    const auto t = forward(net, x);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j)
        for (std::size_t k = j + 1; k <= 3; ++k) {
          const Matrix ik = jacobian_between(net, t, i, k);
          const Matrix ij = jacobian_between(net, t, i, j);
          const Matrix jk = jacobian_between(net, t, j, k);
          EXPECT_LT(relative_difference(ik, ij * jk), 1e-10);
          const std::size_t cap = std::min({ik.rows(), ij.cols(), ik.cols()});
          for (std::size_t h = 1; h <= cap; ++h)
            EXPECT_LT(relative_difference(minors(ik, h).values(), (minors(ij, h) * minors(jk, h)).values()), 1e-8);
        }
  }
}

TEST(Train, ZeroLearningRateLeavesWeights) {
  MLP net = make({2, 3, 1}, {T, I}, 1);
  const MLP before = net;
  Dataset data{{{0.1, 0.2}, {1.0}}, {{-0.3, 0.5}, {0.0}}};
  const auto history = train_sgd(net, data, 5, {0.0, 0, 1});
  EXPECT_EQ(net, before);
  for (double l : history) EXPECT_EQ(l, history.front());
}

TEST(Train, RealizableLinearData) {
  MLP net = make({3, 2}, {I}, 4);
  Matrix truth{{0.5, -1.0, 2.0}, {1.5, 0.25, -0.75}};
  Rng rng(3);
  Dataset data;
  for (int i = 0; i < 20; ++i) {
    Vector x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Vector y(2);
    for (std::size_t r = 0; r < 2; ++r) y[r] = truth(r, 0) * x[0] + truth(r, 1) * x[1] + truth(r, 2) * x[2] + 0.3;
    data.push_back({x, y});
  }
  const auto history = train_sgd(net, data, 500, {0.1, 0, 0});
  EXPECT_LT(history.back(), 1e-6);
}

TEST(Train, LossGradientMatchesFiniteDifferences) {
  const MLP net = make({3, 4, 2}, {T, S}, 12);
  Dataset data;
  for (std::uint64_t s = 0; s < 5; ++s) data.push_back({random_point(3, s), random_point(2, s + 10)});
  std::vector<std::size_t> all{0, 1, 2, 3, 4};
  Gradient g = zero_gradient(net);
  accumulate_gradient(net, data, all, g);
  for (std::size_t j = 1; j <= 2; ++j) {
    Matrix fd(net.weight(j).rows(), net.weight(j).cols());
    for (std::size_t k = 0; k < fd.size(); ++k) {
      MLP p = net, m = net;
      p.weight(j).data()[k] += 1e-6;
      m.weight(j).data()[k] -= 1e-6;
      fd.data()[k] = (mse_loss(p, data) - mse_loss(m, data)) / 2e-6;
    }
    EXPECT_LT(relative_difference(g.weights[j - 1], fd), 1e-6);
    for (std::size_t r = 0; r < net.bias(j).size(); ++r) {
      MLP p = net, m = net;
      p.bias(j)[r] += 1e-6;
      m.bias(j)[r] -= 1e-6;
      EXPECT_NEAR(g.biases[j - 1][r], (mse_loss(p, data) - mse_loss(m, data)) / 2e-6, 1e-8);
    }
  }
}

TEST(Train, DeterministicMinibatches) {
  Dataset data;
  for (std::uint64_t s = 0; s < 12; ++s) data.push_back({random_point(2, s), random_point(1, s + 99)});
  MLP a = make({2, 4, 1}, {T, I}, 2), b = a;
  const auto ha = train_sgd(a, data, 30, {0.05, 4, 77});
  const auto hb = train_sgd(b, data, 30, {0.05, 4, 77});
  EXPECT_EQ(ha, hb);
  EXPECT_EQ(a, b);
  MLP c = make({2, 4, 1}, {T, I}, 2);
  train_sgd(c, data, 30, {0.05, 4, 78});
  EXPECT_NE(a, c);
}

TEST(Train, EpochByEpochEqualsBulk) {
  Dataset data;
  for (std::uint64_t s = 0; s < 10; ++s) data.push_back({random_point(2, s), random_point(2, s + 7)});
  MLP a = make({2, 3, 2}, {T, I}, 5), b = a;
  train_sgd(a, data, 12, {0.1, 3, 4});
  SgdTrainer trainer(data, {0.1, 3, 4});
  for (int e = 0; e < 12; ++e) trainer.epoch(b);
  EXPECT_EQ(a, b);
}

TEST(Train, ShapeMismatch) {
  MLP net = make({2, 1}, {I}, 0);
  EXPECT_THROW(train_sgd(net, {{{1.0}, {1.0}}}, 1, {}), DimensionError);
  EXPECT_THROW(train_sgd(net, {}, 1, {}), ConfigError);
}
