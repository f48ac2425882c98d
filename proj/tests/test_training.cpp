#include <gtest/gtest.h>

#include <cmath>

#include "kamc/exterior.hpp"
#include "kamc/training/interleave.hpp"
#include "kamc/training/mc_objective.hpp"
#include "oracles.hpp"

using namespace kamc;
using namespace kamc::nn;
using namespace kamc::training;

namespace {

constexpr auto I = Activation::identity;
constexpr auto T = Activation::tanh;

MLP make(std::vector<std::size_t> sizes, std::vector<Activation> acts, std::uint64_t seed) {
  MLPConfig c;
  c.layer_sizes = std::move(sizes);
  c.activations = std::move(acts);
  c.seed = seed;
  return init_mlp(c);
}

std::vector<Vector> points(std::size_t count, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out(count, Vector(dim));
  for (auto& p : out)
    for (double& v : p) v = rng.uniform(-1.0, 1.0);
  return out;
}

Dataset teacher_data(std::size_t count, std::uint64_t seed) {
  const MLP teacher = make({3, 4, 2}, {T, I}, seed + 1000);
  Dataset d;
  for (auto& x : points(count, 3, seed)) d.push_back({x, forward(teacher, x).output()});
  return d;
}

MCObjectiveSpec spec(std::size_t i, std::size_t j, std::size_t h, std::vector<Vector> pts) {
  MCObjectiveSpec s;
  s.source_layer = i;
  s.target_layer = j;
  s.h = h;
  s.probe_points = std::move(pts);
  return s;
}

}  // namespace

TEST(Objective, SingleMinorCaseIsOne) {
  // J(1 -> 2) of a [3, 1, 1] net is 1 x 1, so its only minor is itself.
  const MLP net = make({3, 1, 1}, {T, T}, 2);
  const auto v = mc_objective(net, spec(1, 2, 1, points(6, 3, 1)));
  EXPECT_EQ(v.value, 1.0);
  EXPECT_EQ(v.degenerate_count, 0u);
}

TEST(Objective, RepeatedProbesSameMean) {
  const MLP net = make({3, 5, 2}, {T, T}, 4);
  auto pts = points(4, 3, 2);
  const auto once = mc_objective(net, spec(0, 2, 2, pts));
  auto twice = pts;
  twice.insert(twice.end(), pts.begin(), pts.end());
  EXPECT_NEAR(*mc_objective(net, spec(0, 2, 2, twice)).value, *once.value, 1e-15);
}

TEST(Objective, EqualsComponentwiseMean) {
  const MLP net = make({4, 6, 3}, {T, T}, 8);
  const auto pts = points(8, 4, 3);
  double sum = 0.0;
  for (const auto& y : pts) sum += oracle::brute_mc(jacobian_between(net, y, 0, 2), 2);
  EXPECT_NEAR(*mc_objective(net, spec(0, 2, 2, pts)).value, sum / 8.0, 1e-12);
}

TEST(Objective, DegeneratePointsDroppedAndCounted) {
  MLP net = make({2, 2}, {I}, 1);
  net.weight(1) = Matrix{{1, 2}, {2, 4}};  // rank one: every 2 x 2 minor vanishes
  const auto v = mc_objective(net, spec(0, 1, 2, points(3, 2, 1)));
  EXPECT_FALSE(v.value.has_value());
  EXPECT_EQ(v.degenerate_count, 3u);
  EXPECT_THROW(mc_gradient(net, spec(0, 1, 2, points(3, 2, 1)), {}), DegenerateError);
}

TEST(Objective, InvalidSpecs) {
  const MLP net = make({3, 2}, {T}, 1);
  EXPECT_THROW(mc_objective(net, spec(0, 1, 3, points(1, 3, 1))), ConfigError);
  EXPECT_THROW(mc_objective(net, spec(1, 1, 1, points(1, 3, 1))), ConfigError);
  EXPECT_THROW(mc_objective(net, spec(0, 1, 1, {})), ConfigError);
  EXPECT_THROW(mc_objective(net, spec(0, 1, 1, points(1, 2, 1))), DimensionError);
}

TEST(Gradient, ScopeContract) {
  const MLP net = make({3, 4, 3, 2}, {T, T, T}, 3);
  const auto s = spec(0, 3, 2, points(4, 3, 5));
  const auto g = mc_gradient(net, s, {});
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g.begin()->first, 3u);

  MCStepConfig wide;
  wide.parameter_scope = {1, 2};
  const auto g2 = mc_gradient(net, s, wide);
  EXPECT_EQ(g2.size(), 2u);
  EXPECT_FALSE(g2.count(3));

  MCStepConfig bad;
  bad.parameter_scope = {0};
  EXPECT_THROW(mc_gradient(net, s, bad), ConfigError);
  MLP other = net;
  mc_step(other, g2, 0.5);
  EXPECT_EQ(other.weight(3), net.weight(3));
  EXPECT_EQ(other.biases, net.biases);
  EXPECT_NE(other.weight(1), net.weight(1));
}

TEST(Gradient, SymbolicTwoByTwo) {
  MLP net = make({2, 2}, {I}, 0);
  net.weight(1) = Matrix{{0.8, -0.3}, {0.5, 1.7}};
  const auto g = mc_gradient(net, spec(0, 1, 1, {{0.2, -0.4}}), {0.0, {}, 1e-6});
  const auto w = net.weight(1).data();
  const auto want = oracle::l2_over_l1_gradient({w.begin(), w.end()});
  const Matrix& got = g.at(1);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(got.data()[k], want[k], 1e-8 * std::max(1.0, std::abs(want[k])));
}

TEST(Gradient, DirectionalDerivative) {
  const MLP net = make({3, 5, 3}, {T, T}, 13);
  const auto s = spec(0, 2, 2, points(6, 3, 8));
  MCStepConfig cfg;
  cfg.parameter_scope = {1, 2};
  cfg.fd_step = 1e-6;
  const auto g = mc_gradient(net, s, cfg);

  Rng rng(99);
  WeightGradient dir;
  double norm = 0.0;
  for (const auto& [j, m] : g) {
    Matrix d(m.rows(), m.cols());
    for (double& v : d.data()) {
      v = rng.normal();
      norm += v * v;
    }
    dir.emplace(j, std::move(d));
  }
  norm = std::sqrt(norm);
  double predicted = 0.0;
  for (auto& [j, d] : dir) {
    d *= 1.0 / norm;
    for (std::size_t k = 0; k < d.size(); ++k) predicted += d.data()[k] * g.at(j).data()[k];
  }
  const double eps = 1e-5;
  MLP up = net, down = net;
  mc_step(up, dir, eps);
  mc_step(down, dir, -eps);
  const double measured = (*mc_objective(up, s).value - *mc_objective(down, s).value) / (2 * eps);
  EXPECT_NEAR(predicted, measured, 1e-4 * std::abs(measured));
}

TEST(Step, ZeroIsIdentity) {
  MLP net = make({3, 4, 2}, {T, T}, 1);
  const MLP before = net;
  const auto g = mc_gradient(net, spec(0, 2, 2, points(3, 3, 1)), {});
  mc_step(net, g, 0.0);
  EXPECT_EQ(net, before);
}

TEST(Step, SymmetricAboutOrigin) {
  const MLP net = make({3, 4, 2}, {T, T}, 1);
  const auto g = mc_gradient(net, spec(0, 2, 2, points(3, 3, 1)), {});
  MLP plus = net, minus = net;
  mc_step(plus, g, 0.01);
  mc_step(minus, g, -0.01);
  for (std::size_t k = 0; k < net.weight(2).size(); ++k)
    EXPECT_NEAR(plus.weight(2).data()[k] + minus.weight(2).data()[k], 2 * net.weight(2).data()[k], 1e-15);
}

TEST(Step, ShapeMismatch) {
  MLP net = make({3, 4, 2}, {T, T}, 1);
  WeightGradient g;
  g.emplace(2, Matrix(3, 3));
  EXPECT_THROW(mc_step(net, g, 0.1), DimensionError);
  WeightGradient h;
  h.emplace(5, Matrix(2, 4));
  EXPECT_THROW(mc_step(net, h, 0.1), DimensionError);
}

TEST(Step, FirstOrderAscentAndDescent) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MLP net = make({3, 5, 3}, {T, T}, seed);
    const auto s = spec(0, 2, 2, points(5, 3, seed + 40));
    const auto g = mc_gradient(net, s, {});
    ASSERT_GT(gradient_norm(g), 1e-6);
    const double base = *mc_objective(net, s).value;
    MLP up = net, down = net;
    mc_step(up, g, 1e-4);
    mc_step(down, g, -1e-4);
    EXPECT_GT(*mc_objective(up, s).value, base);
    EXPECT_LT(*mc_objective(down, s).value, base);
  }
}

// ---- interleaved training ---------------------------------------------------

TEST(Interleave, ZeroDeltaMatchesPlainSgd) {
  const Dataset data = teacher_data(16, 3);
  MLP a = make({3, 4, 2}, {T, I}, 6), b = a;
  InterleaveSchedule sched{2, 20, 0.1, 4, 11};
  MCStepConfig step;
  const auto metrics = interleaved_train(a, data, spec(0, 2, 2, points(4, 3, 2)), step, sched);
  const auto history = train_sgd(b, data, 20, {0.1, 4, 11});
  EXPECT_EQ(a, b);
  ASSERT_EQ(metrics.records.size(), 20u);
  for (std::size_t s = 0; s < 20; ++s) {
    EXPECT_EQ(metrics.records[s].task_loss, history[s]);
    EXPECT_EQ(metrics.records[s].delta_prime_applied, 0.0);
    EXPECT_EQ(metrics.records[s].mc_step, (s + 1) % 2 == 0);
  }
}

TEST(Interleave, EmptyRun) {
  const Dataset data = teacher_data(4, 3);
  MLP net = make({3, 4, 2}, {T, I}, 6);
  const MLP before = net;
  MCStepConfig step;
  step.delta_prime = 0.1;
  const auto m = interleaved_train(net, data, spec(0, 2, 2, points(2, 3, 2)), step, {1, 0, 0.1, 0, 0});
  EXPECT_TRUE(m.records.empty());
  EXPECT_EQ(net, before);
}

TEST(Interleave, ScopeIsolationDuringTraining) {
  // With a zero learning rate only MC steps move weights, so layers outside
  // the scope must stay bit-identical.
  const Dataset data = teacher_data(8, 1);
  MLP net = make({3, 4, 2}, {T, I}, 2);
  const MLP before = net;
  MCStepConfig step;
  step.delta_prime = 0.05;
  interleaved_train(net, data, spec(0, 2, 2, points(3, 3, 4)), step, {1, 5, 0.0, 0, 0});
  EXPECT_EQ(net.weight(1), before.weight(1));
  EXPECT_EQ(net.biases, before.biases);
  EXPECT_NE(net.weight(2), before.weight(2));
}

TEST(Interleave, SignedRunsOrderedAfterMcSteps) {
  const Dataset data = teacher_data(16, 5);
  const MLP init = make({3, 4, 2}, {T, I}, 21);
  const auto s = spec(0, 2, 2, points(4, 3, 6));
  InterleaveSchedule sched{3, 12, 0.05, 0, 1};
  std::vector<RunMetrics> runs;
  for (double d : {0.01, 0.0, -0.01}) {
    MLP net = init;
    MCStepConfig step;
    step.delta_prime = d;
    runs.push_back(interleaved_train(net, data, s, step, sched));
  }
  // The first MC step follows identical task epochs, so its effect is
  // attributable to the sign of delta' alone.
  const std::size_t k = 2;
  ASSERT_TRUE(runs[0].records[k].mc_step);
  EXPECT_GT(*runs[0].records[k].mc_value, *runs[1].records[k].mc_value);
  EXPECT_GT(*runs[1].records[k].mc_value, *runs[2].records[k].mc_value);
  for (const auto& r : runs)
    for (const auto& rec : r.records) {
      ASSERT_TRUE(rec.mc_value.has_value());
      EXPECT_GE(*rec.mc_value, 1.0 / std::sqrt(3.0) - 1e-12);
      EXPECT_LE(*rec.mc_value, 1.0);
      EXPECT_TRUE(std::isfinite(rec.task_loss));
    }
}

TEST(Interleave, DegenerateObjectiveSkipsMcStep) {
  Dataset data{{{1.0, 0.0}, {0.0, 0.0}}};
  MLP net = make({2, 2}, {I}, 1);
  net.weight(1) = Matrix{{1, 2}, {2, 4}};
  MCStepConfig step;
  step.delta_prime = 0.1;
  // Zero learning rate keeps the weights singular.
  const auto m = interleaved_train(net, data, spec(0, 1, 2, points(2, 2, 1)), step, {1, 3, 0.0, 0, 0});
  for (const auto& rec : m.records) {
    EXPECT_TRUE(rec.mc_skipped);
    EXPECT_FALSE(rec.mc_value.has_value());
    EXPECT_EQ(rec.degenerate_count, 2u);
  }
}

TEST(Interleave, InvalidSchedule) {
  const Dataset data = teacher_data(4, 3);
  MLP net = make({3, 4, 2}, {T, I}, 6);
  EXPECT_THROW(interleaved_train(net, data, spec(0, 2, 2, points(2, 3, 2)), {}, {0, 5, 0.1, 0, 0}), ConfigError);
}

// ---- run comparison -----------------------------------------------------------

namespace {

RunMetrics run_with(double delta, std::uint64_t seed, std::uint64_t init_seed = 21) {
  const Dataset data = teacher_data(16, 5);
  MLP net = make({3, 4, 2}, {T, I}, init_seed);
  MCStepConfig step;
  step.delta_prime = delta;
  return interleaved_train(net, data, spec(0, 2, 2, points(4, 3, 6)), step, {2, 30, 0.2, 0, seed});
}

}  // namespace

TEST(Compare, SelfComparisonIsZero) {
  const auto r = run_with(0.01, 1);
  const auto c = compare_runs({r, r}, 0.05);
  EXPECT_TRUE(c.task_config_match);
  EXPECT_TRUE(c.varying_fields.empty());
  for (const auto& s : c.runs) {
    EXPECT_EQ(s.max_loss_difference, 0.0);
    EXPECT_EQ(s.max_mc_difference, 0.0);
  }
}

TEST(Compare, SeedDifferenceFlagged) {
  const auto c = compare_runs({run_with(0.0, 1), run_with(0.0, 2)}, 0.05);
  EXPECT_TRUE(c.task_config_match);
  EXPECT_EQ(c.varying_fields, std::vector<std::string>{"seed"});
  const auto d = compare_runs({run_with(0.0, 1), run_with(0.0, 1, 22)}, 0.05);
  EXPECT_EQ(d.varying_fields, std::vector<std::string>{"initSeed"});
}

TEST(Compare, StepsToThresholdRecomputedFromHistory) {
  const auto a = run_with(0.0, 1);
  const auto b = run_with(0.02, 1);
  const double threshold = 0.5 * (a.records.front().task_loss + a.records.back().task_loss);
  const auto c = compare_runs({a, b}, threshold);
  EXPECT_EQ(c.varying_fields, std::vector<std::string>{"deltaPrime"});
  for (std::size_t r = 0; r < 2; ++r) {
    const auto& recs = (r == 0 ? a : b).records;
    std::optional<std::size_t> first;
    for (std::size_t k = 0; k < recs.size() && !first; ++k)
      if (recs[k].task_loss <= threshold) first = recs[k].step;
    EXPECT_EQ(c.runs[r].steps_to_threshold, first);
    EXPECT_EQ(c.runs[r].final_mc, recs.back().mc_value);
    EXPECT_EQ(c.runs[r].final_loss, recs.back().task_loss);
  }
  ASSERT_TRUE(c.runs[0].steps_to_threshold.has_value());
  EXPECT_EQ(c.aligned.size(), 30u);
}

TEST(Compare, MismatchedConfigsRejected) {
  const auto a = run_with(0.0, 1);
  auto b = a;
  b.config.h = 1;
  EXPECT_THROW(compare_runs({a, b}, 0.1), ConfigError);
  EXPECT_THROW(compare_runs({a}, 0.1), ConfigError);
  auto c = a;
  c.records.pop_back();
  EXPECT_THROW(compare_runs({a, c}, 0.1), ConfigError);
}
