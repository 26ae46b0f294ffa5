#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "mmw/core/error.hpp"
#include "mmw/dataset/dataset.hpp"

namespace mmw {

struct TrainTestSplit {
  LabeledDataset train;
  LabeledDataset test;
};

/// Stratified split by joint class at contiguous-block granularity.
///
/// For each class, its rows (in dataset order across its captures) are treated
/// as one sequence and a single contiguous segment of round(fraction * n) rows,
/// starting at a seeded offset and wrapping around, goes to the test side. Each
/// maximal piece of an original capture becomes its own capture in the output,
/// renumbered from 0 in order of appearance, so no output capture spans a cut.
inline TrainTestSplit split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must be in (0, 1)");
  }
  ds.validate();
  std::vector<std::vector<std::size_t>> by_class(kJointCount);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i].joint_index()].push_back(i);

  std::vector<bool> in_test(ds.size(), false);
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < kJointCount; ++c) {
    const auto& rows = by_class[c];
    const std::size_t n = rows.size();
    if (n == 0) throw StratificationError("class " + joint_name(c) + " is absent");
    const auto t = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    if (t == 0 || t == n) {
      throw StratificationError("class " + joint_name(c) + " has " + std::to_string(n) +
                                " rows, too few for test fraction " + std::to_string(test_fraction));
    }
    std::uniform_int_distribution<std::size_t> start_dist(0, n - 1);
    const std::size_t start = start_dist(rng);
    for (std::size_t j = 0; j < t; ++j) in_test[rows[(start + j) % n]] = true;
  }

  TrainTestSplit out{{ds.schema, {}, {}, {}}, {ds.schema, {}, {}, {}}};
  CaptureId next_train = 0, next_test = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const bool starts_piece = i == 0 || ds.capture_ids[i] != ds.capture_ids[i - 1] || in_test[i] != in_test[i - 1];
    auto& side = in_test[i] ? out.test : out.train;
    auto& next = in_test[i] ? next_test : next_train;
    if (starts_piece) ++next;
    side.push_back(ds.records[i], ds.labels[i], next - 1);
  }
  return out;
}

}  // namespace mmw
