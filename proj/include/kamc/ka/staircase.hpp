#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "kamc/error.hpp"

namespace kamc::ka {

inline constexpr std::size_t kFamilies = 5;
inline constexpr double kMaxGapFraction = 0.2;

/// A closed 1-D interval [lo, hi] within [0, 1].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double center() const noexcept { return 0.5 * (lo + hi); }
};

/// One plateau of a staircase restricted to [0, 1].
struct Plateau {
  std::int64_t index = 0;
  Interval span;
  double value = 0.0;
};

/// Monotone piecewise-linear staircase of one grid family.
///
/// Positions are measured in units of sigma / 5 (u = 5 * level * x), where
/// sigma = 1 / level is the cell side. Family k has open ramps (gaps)
/// (5j + k, 5j + k + 5 gamma) for every integer j; plateau j is the closed
/// interval [5(j-1) + k + 5 gamma, 5j + k] with value (5j + k) / (5 level),
/// and each ramp rises linearly from one plateau value to the next with
/// slope 1 / gamma. Since gamma <= 1/5 the ramps of the five families are
/// pairwise disjoint, so any x lies in the gap of at most one family.
class Staircase {
 public:
  enum class Region { plateau, ramp, boundary };

  struct Location {
    Region region;
    std::int64_t index;  // plateau index, or index of the plateau left of a ramp
    double t;            // position across a ramp, in [0, 1]
  };

  Staircase(std::size_t family, std::size_t level, double gamma)
      : family_(family), level_(level), gamma_(gamma) {
    if (family >= kFamilies) throw ConfigError("family", "must be in [0, 4]");
    if (level < 2) throw ConfigError("level", "must be at least 2");
    if (!(gamma > 0.0 && gamma <= kMaxGapFraction))
      throw ConfigError("gamma", "must lie in (0, 1/5]");
    ramp_units_ = 5.0 * gamma_;
  }

  std::size_t family() const noexcept { return family_; }
  std::size_t level() const noexcept { return level_; }
  double gamma() const noexcept { return gamma_; }
  double sigma() const noexcept { return 1.0 / static_cast<double>(level_); }
  double shift() const noexcept { return static_cast<double>(family_) * sigma() / 5.0; }
  double ramp_slope() const noexcept { return 1.0 / gamma_; }

  double plateau_value(std::int64_t j) const {
    return static_cast<double>(5 * j + static_cast<std::int64_t>(family_)) /
           (5.0 * static_cast<double>(level_));
  }

  Location locate(double x) const {
    const double u = x * 5.0 * static_cast<double>(level_);
    const double whole = std::floor(u);
    const double frac = u - whole;
    const auto d = static_cast<std::int64_t>(whole) - static_cast<std::int64_t>(family_);
    const std::int64_t period = d >= 0 ? d / 5 : -((-d + 4) / 5);
    const double offset = static_cast<double>(d - 5 * period) + frac;  // in [0, 5)
    if (offset == 0.0) return {Region::boundary, period, 0.0};
    if (offset < ramp_units_) return {Region::ramp, period, offset / ramp_units_};
    if (offset == ramp_units_) return {Region::boundary, period + 1, 1.0};
    return {Region::plateau, period + 1, 0.0};
  }

  double operator()(double x) const {
    const Location loc = locate(x);
    switch (loc.region) {
      case Region::plateau:
        return plateau_value(loc.index);
      case Region::boundary:
        return plateau_value(loc.index);
      case Region::ramp:
        return plateau_value(loc.index) + loc.t * sigma();
    }
    return 0.0;
  }

  /// Slope at x; throws BoundaryPointError at ramp endpoints.
  double derivative(double x) const {
    const Location loc = locate(x);
    if (loc.region == Region::boundary)
      throw BoundaryPointError("staircase " + std::to_string(family_) +
                               ": derivative undefined at a ramp endpoint");
    return loc.region == Region::ramp ? ramp_slope() : 0.0;
  }

  bool in_gap(double x) const { return locate(x).region == Region::ramp; }
  bool on_boundary(double x) const { return locate(x).region == Region::boundary; }

  /// Open gaps meeting [0, 1], as closures clipped to [0, 1].
  std::vector<Interval> gaps() const {
    std::vector<Interval> out;
    const double units = 5.0 * static_cast<double>(level_);
    for (std::int64_t j = -1; j <= static_cast<std::int64_t>(level_) + 1; ++j) {
      const auto start = static_cast<double>(5 * j + static_cast<std::int64_t>(family_));
      const double lo = start / units;
      const double hi = (start + ramp_units_) / units;
      if (hi <= 0.0 || lo >= 1.0) continue;
      out.push_back({std::max(lo, 0.0), std::min(hi, 1.0)});
    }
    return out;
  }

  /// Plateaus with a nonempty intersection with [0, 1] (possibly one point).
  std::vector<Plateau> plateaus() const {
    std::vector<Plateau> out;
    const double units = 5.0 * static_cast<double>(level_);
    const auto k = static_cast<std::int64_t>(family_);
    for (std::int64_t j = -1; j <= static_cast<std::int64_t>(level_) + 1; ++j) {
      const double lo = static_cast<double>(5 * (j - 1) + k) + ramp_units_;
      const double hi = static_cast<double>(5 * j + k);
      if (hi < 0.0 || lo > units) continue;
      out.push_back({j, {std::max(lo, 0.0) / units, std::min(hi, units) / units}, plateau_value(j)});
    }
    return out;
  }

 private:
  std::size_t family_;
  std::size_t level_;
  double gamma_;
  double ramp_units_ = 1.0;
};

inline Staircase build_staircase(std::size_t family, std::size_t level, double gamma) {
  return Staircase(family, level, gamma);
}

}  // namespace kamc::ka
