#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mmw/core/error.hpp"
#include "mmw/core/hash.hpp"
#include "mmw/dataset/labels.hpp"
#include "mmw/dataset/schema.hpp"

namespace mmw {

using CaptureId = std::uint64_t;

/// One telemetry sample, values aligned to the schema order.
struct LinkStatsRecord {
  double timestamp = 0.0;
  std::vector<double> values;

  friend bool operator==(const LinkStatsRecord&, const LinkStatsRecord&) = default;
};

/// A contiguous run of rows sharing one capture id.
struct CaptureRun {
  CaptureId id;
  std::size_t begin;
  std::size_t end;  // one past last
  std::size_t size() const { return end - begin; }
};

/// Rows grouped into contiguous runs of equal id.
template <class IdVector>
std::vector<CaptureRun> capture_runs(const IdVector& ids) {
  std::vector<CaptureRun> runs;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (runs.empty() || runs.back().id != ids[i]) {
      runs.push_back({ids[i], i, i + 1});
    } else {
      runs.back().end = i + 1;
    }
  }
  return runs;
}

struct LabeledDataset {
  LinkStatsSchema schema;
  std::vector<LinkStatsRecord> records;
  std::vector<ClassLabel> labels;
  std::vector<CaptureId> capture_ids;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }

  double value(std::size_t row, std::size_t feature) const { return records[row].values[feature]; }

  void push_back(LinkStatsRecord r, ClassLabel l, CaptureId c) {
    records.push_back(std::move(r));
    labels.push_back(l);
    capture_ids.push_back(c);
  }

  /// Throws DataError on the first violated invariant.
  void validate() const {
    if (labels.size() != records.size() || capture_ids.size() != records.size()) {
      throw DataError("records, labels and capture ids differ in length");
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].values.size() != schema.size()) {
        throw DataError("row " + std::to_string(i) + " has " + std::to_string(records[i].values.size()) +
                        " values, schema has " + std::to_string(schema.size()));
      }
      for (double v : records[i].values) {
        if (!std::isfinite(v)) throw DataError("row " + std::to_string(i) + " has a non-finite value");
      }
    }
    std::vector<CaptureId> closed;
    for (const auto& run : capture_runs(capture_ids)) {
      for (CaptureId c : closed) {
        if (c == run.id) {
          throw DataError("capture " + std::to_string(run.id) + " is not contiguous");
        }
      }
      closed.push_back(run.id);
      for (std::size_t i = run.begin + 1; i < run.end; ++i) {
        if (!(labels[i] == labels[run.begin])) {
          throw DataError("capture " + std::to_string(run.id) + " mixes labels");
        }
        if (records[i].timestamp < records[i - 1].timestamp) {
          throw DataError("capture " + std::to_string(run.id) + " has decreasing timestamps");
        }
      }
    }
  }

  /// Rows of the given joint class, in dataset order.
  std::vector<std::size_t> rows_of_class(std::size_t joint) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i].joint_index() == joint) out.push_back(i);
    }
    return out;
  }

  /// Fingerprint of schema names, values, labels and capture ids.
  std::string content_hash() const {
    Fnv1a h;
    for (const auto& n : schema.feature_names()) {
      h.update(n);
      h.update(std::string_view("\x1f"));
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      for (double v : records[i].values) h.update(v);
      h.update_u64(labels[i].joint_index());
      h.update_u64(capture_ids[i]);
    }
    return h.hex();
  }

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// Rows whose distance is not one of the five trained classes (25/35 ft probes).
struct HeldoutDataset {
  LinkStatsSchema schema;
  std::vector<LinkStatsRecord> records;
  std::vector<double> distance_ft;
  std::vector<double> angle_deg;
  std::vector<CaptureId> capture_ids;

  std::size_t size() const noexcept { return records.size(); }

  friend bool operator==(const HeldoutDataset&, const HeldoutDataset&) = default;
};

}  // namespace mmw
