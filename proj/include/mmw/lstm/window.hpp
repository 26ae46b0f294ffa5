#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmw/core/error.hpp"
#include "mmw/core/log.hpp"
#include "mmw/dataset/dataset.hpp"
#include "mmw/features/matrix.hpp"

namespace mmw::lstm {

inline constexpr std::size_t kDefaultWindowLength = 20;
inline constexpr std::size_t kDefaultStride = 5;

struct Window {
  Eigen::MatrixXd x;  // L x k, oldest row first
  ClassLabel label;
  CaptureId capture_id = 0;
};

/// Sliding windows inside each capture run; captures shorter than `length` are skipped.
inline std::vector<Window> make_windows(const FeatureMatrix& features, std::size_t length, std::size_t stride) {
  if (length < 1) throw ConfigError("window length must be >= 1");
  if (stride < 1) throw ConfigError("window stride must be >= 1");
  if (features.labels.size() != static_cast<std::size_t>(features.rows()) ||
      features.capture_ids.size() != features.labels.size()) {
    throw ConfigError("feature matrix labels and capture ids do not match its rows");
  }
  std::vector<Window> out;
  for (const auto& run : capture_runs(features.capture_ids)) {
    const std::size_t len = run.end - run.begin;
    if (len < length) {
      log::warn("capture " + std::to_string(run.id) + " has " + std::to_string(len) + " rows, shorter than window " +
                std::to_string(length) + "; skipped");
      continue;
    }
    for (std::size_t s = run.begin; s + length <= run.end; s += stride) {
      Window w;
      w.x = features.values.middleRows(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(length));
      w.label = features.labels[s];
      w.capture_id = run.id;
      for (std::size_t r = s + 1; r < s + length; ++r) {
        if (!(features.labels[r] == w.label)) throw LabelError("capture " + std::to_string(run.id) + " changes label");
      }
      out.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace mmw::lstm
