#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmw/dataset/dataset.hpp"

namespace mmw {

/// Transformed feature rows with their labels and capture ids carried through.
struct FeatureMatrix {
  Eigen::MatrixXd values;  // rows x k
  std::vector<ClassLabel> labels;
  std::vector<CaptureId> capture_ids;
  std::vector<std::string> column_names;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  /// Subset of rows, in the given order.
  FeatureMatrix select_rows(const std::vector<std::size_t>& idx) const {
    FeatureMatrix out;
    out.values.resize(static_cast<Eigen::Index>(idx.size()), values.cols());
    out.column_names = column_names;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      out.values.row(static_cast<Eigen::Index>(r)) = values.row(static_cast<Eigen::Index>(idx[r]));
      out.labels.push_back(labels[idx[r]]);
      out.capture_ids.push_back(capture_ids[idx[r]]);
    }
    return out;
  }
};

/// Raw dataset values as a rows x 31 matrix.
inline Eigen::MatrixXd to_matrix(const LabeledDataset& ds) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(ds.schema.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t f = 0; f < ds.schema.size(); ++f) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = ds.records[i].values[f];
    }
  }
  return m;
}

}  // namespace mmw
