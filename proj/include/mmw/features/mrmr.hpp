#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "mmw/core/error.hpp"
#include "mmw/features/mutual_information.hpp"

namespace mmw {

struct MrmrRanking {
  std::vector<std::size_t> selected;  // selection order
  std::vector<double> scores;         // criterion value when picked
  std::vector<double> relevance;      // I(feature; label) for every feature
};

/// Greedy MRMR, difference (MID) form: the first pick maximizes I(f; y), each
/// later pick maximizes I(f; y) - mean over selected s of I(f; s). A candidate
/// must beat the incumbent by more than 1e-12 to win, so near-ties go to the
/// lower feature index.
inline MrmrRanking mrmr_rank(const std::vector<Discretized>& features, const Discretized& label, std::size_t k) {
  const std::size_t d = features.size();
  if (k < 1 || k > d) {
    throw ConfigError("mrmr: k must be in [1, " + std::to_string(d) + "], got " + std::to_string(k));
  }
  constexpr double kTieTolerance = 1e-12;
  MrmrRanking out;
  out.relevance.resize(d);
  for (std::size_t f = 0; f < d; ++f) out.relevance[f] = mutual_information(features[f], label);

  std::vector<double> redundancy_sum(d, 0.0);
  std::vector<bool> taken(d, false);
  for (std::size_t step = 0; step < k; ++step) {
    if (step > 0) {
      const std::size_t last = out.selected.back();
      for (std::size_t f = 0; f < d; ++f) {
        if (!taken[f]) redundancy_sum[f] += mutual_information(features[f], features[last]);
      }
    }
    std::size_t best = d;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < d; ++f) {
      if (taken[f]) continue;
      const double score =
          out.relevance[f] - (step == 0 ? 0.0 : redundancy_sum[f] / static_cast<double>(step));
      if (best == d || score > best_score + kTieTolerance) {
        best = f;
        best_score = score;
      }
    }
    taken[best] = true;
    out.selected.push_back(best);
    out.scores.push_back(best_score);
  }
  return out;
}

}  // namespace mmw
