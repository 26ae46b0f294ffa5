#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "mmw/core/error.hpp"

namespace mmw {

/// Discrete codes 0..levels-1 for one variable.
struct Discretized {
  std::vector<int> codes;
  int levels = 0;
};

/// Equal-frequency binning. Tied values share a bin, placed by the mid-rank
/// of their group: bin = floor((first_rank + count / 2) * bins / n).
inline Discretized equal_frequency_bins(std::span<const double> values, int bins) {
  if (bins < 2) throw ConfigError("bins must be >= 2");
  const std::size_t n = values.size();
  Discretized out{std::vector<int>(n, 0), bins};
  if (n == 0) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double mid = static_cast<double>(i) + static_cast<double>(j - i) / 2.0;
    int bin = static_cast<int>(std::floor(mid * bins / static_cast<double>(n)));
    bin = std::clamp(bin, 0, bins - 1);
    for (std::size_t t = i; t < j; ++t) out.codes[order[t]] = bin;
    i = j;
  }
  return out;
}

/// Plug-in mutual information in nats.
inline double mutual_information(const Discretized& a, const Discretized& b) {
  if (a.codes.size() != b.codes.size()) throw ConfigError("mutual_information: length mismatch");
  const std::size_t n = a.codes.size();
  if (n == 0) return 0.0;
  const auto la = static_cast<std::size_t>(a.levels), lb = static_cast<std::size_t>(b.levels);
  std::vector<double> joint(la * lb, 0.0), pa(la, 0.0), pb(lb, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = static_cast<std::size_t>(a.codes[i]), y = static_cast<std::size_t>(b.codes[i]);
    joint[x * lb + y] += 1.0;
    pa[x] += 1.0;
    pb[y] += 1.0;
  }
  const double dn = static_cast<double>(n);
  double mi = 0.0;
  for (std::size_t x = 0; x < la; ++x) {
    for (std::size_t y = 0; y < lb; ++y) {
      const double c = joint[x * lb + y];
      if (c > 0.0) mi += (c / dn) * std::log(c * dn / (pa[x] * pb[y]));
    }
  }
  return std::max(mi, 0.0);
}

}  // namespace mmw
