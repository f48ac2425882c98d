#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "kamc/error.hpp"
#include "kamc/exterior.hpp"
#include "kamc/matrix.hpp"
#include "kamc/random.hpp"

namespace kamc {

/// p x q matrix of i.i.d. standard normals drawn from `Rng(seed)`.
inline Matrix random_gaussian_matrix(std::size_t p, std::size_t q, std::uint64_t seed) {
  Matrix m(p, q);
  Rng rng(seed);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

inline constexpr std::array<double, 5> kSummaryQuantiles{0.05, 0.25, 0.50, 0.75, 0.95};

/// Distribution summary of MC over a seeded Gaussian ensemble.
struct EnsembleSummary {
  std::size_t rows = 0, cols = 0, h = 0;
  std::size_t trials = 0;      // requested
  std::size_t degenerate = 0;  // excluded from the statistics below
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1)
  double min = 0.0;
  double max = 0.0;
  std::array<double, 5> quantiles{};  // at kSummaryQuantiles
  std::uint64_t seed = 0;
  std::vector<double> values;  // raw non-degenerate MC values, trial order
};

/// Linear-interpolation quantile of sorted data (R type 7).
inline double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw Error("quantile of empty sample");
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Seed of trial `t` in an ensemble seeded with `seed`.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t t) { return mix_seed(seed, t); }

inline EnsembleSummary summarize(std::vector<double> values, std::size_t trials,
                                 std::uint64_t seed) {
  EnsembleSummary s;
  s.trials = trials;
  s.seed = seed;
  s.degenerate = trials - values.size();
  s.values = values;
  if (values.empty()) throw DegenerateError("ensemble: every trial was degenerate");

  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  for (std::size_t i = 0; i < kSummaryQuantiles.size(); ++i)
    s.quantiles[i] = quantile_sorted(values, kSummaryQuantiles[i]);
  return s;
}

/// MC of `trials` Gaussian p x q matrices; trial t uses seed trial_seed(seed, t).
inline EnsembleSummary mc_baseline(std::size_t p, std::size_t q, std::size_t h,
                                   std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw ConfigError("trials", "must be at least 1");
  std::vector<double> values;
  values.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    if (auto v = mc(random_gaussian_matrix(p, q, trial_seed(seed, t)), h)) values.push_back(*v);
  }
  auto s = summarize(std::move(values), trials, seed);
  s.rows = p;
  s.cols = q;
  s.h = h;
  return s;
}

}  // namespace kamc
