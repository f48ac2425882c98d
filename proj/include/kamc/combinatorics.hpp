#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "kamc/error.hpp"

namespace kamc {

using Subset = std::vector<std::size_t>;

/// C(n, k), saturating at SIZE_MAX.
inline std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::size_t>::max())
      return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(r);
}

/// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<Subset> subsets(std::size_t n, std::size_t k) {
  std::vector<Subset> out;
  if (k == 0 || k > n) return out;
  out.reserve(binomial(n, k));
  Subset s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = i;
  while (true) {
    out.push_back(s);
    std::size_t i = k;
    while (i > 0 && s[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++s[i - 1];
    for (std::size_t j = i; j < k; ++j) s[j] = s[j - 1] + 1;
  }
  return out;
}

/// Lexicographic rank of a sorted k-subset of {0..n-1}.
inline std::size_t subset_rank(const Subset& s, std::size_t n) {
  const std::size_t k = s.size();
  std::size_t rank = 0;
  std::size_t prev = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (s[i] >= n || (i > 0 && s[i] <= s[i - 1]))
      throw DimensionError("subset_rank: subset not strictly increasing in range");
    for (std::size_t v = prev; v < s[i]; ++v) rank += binomial(n - v - 1, k - i - 1);
    prev = s[i] + 1;
  }
  return rank;
}

}  // namespace kamc
