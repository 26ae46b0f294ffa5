#pragma once

#include "mmw/core/error.hpp"
#include "mmw/dataset/dataset.hpp"

namespace mmw {

/// Replaces each lifetime counter by its per-sample increment within a capture.
/// The first row of every capture has no predecessor and is dropped.
inline LabeledDataset normalize_counters(const LabeledDataset& ds) {
  ds.validate();
  LabeledDataset out{ds.schema, {}, {}, {}};
  const auto& flags = ds.schema.counter_flags();
  for (const auto& run : capture_runs(ds.capture_ids)) {
    if (run.size() < 2) {
      throw DegenerateCaptureError("capture " + std::to_string(run.id) + " has " +
                                   std::to_string(run.size()) + " record(s); differencing needs 2");
    }
    for (std::size_t i = run.begin + 1; i < run.end; ++i) {
      LinkStatsRecord rec = ds.records[i];
      for (std::size_t f = 0; f < flags.size(); ++f) {
        if (flags[f]) rec.values[f] = ds.records[i].values[f] - ds.records[i - 1].values[f];
      }
      out.push_back(std::move(rec), ds.labels[i], ds.capture_ids[i]);
    }
  }
  return out;
}

inline HeldoutDataset normalize_counters(const HeldoutDataset& ds) {
  HeldoutDataset out{ds.schema, {}, {}, {}, {}};
  const auto& flags = ds.schema.counter_flags();
  for (const auto& run : capture_runs(ds.capture_ids)) {
    if (run.size() < 2) {
      throw DegenerateCaptureError("capture " + std::to_string(run.id) + " has " +
                                   std::to_string(run.size()) + " record(s); differencing needs 2");
    }
    for (std::size_t i = run.begin + 1; i < run.end; ++i) {
      LinkStatsRecord rec = ds.records[i];
      for (std::size_t f = 0; f < flags.size(); ++f) {
        if (flags[f]) rec.values[f] = ds.records[i].values[f] - ds.records[i - 1].values[f];
      }
      out.records.push_back(std::move(rec));
      out.distance_ft.push_back(ds.distance_ft[i]);
      out.angle_deg.push_back(ds.angle_deg[i]);
      out.capture_ids.push_back(ds.capture_ids[i]);
    }
  }
  return out;
}

}  // namespace mmw
