#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmw/core/error.hpp"

namespace mmw {

/// Per-feature z-scoring with population (n) statistics.
struct Standardizer {
  Eigen::VectorXd means;
  Eigen::VectorXd stddevs;  // zero-variance features store 1

  static Standardizer fit(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) throw FitError("standardizer needs at least 2 rows, got " + std::to_string(x.rows()));
    Standardizer s;
    const double n = static_cast<double>(x.rows());
    s.means = x.colwise().mean().transpose();
    s.stddevs.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double var = (x.col(c).array() - s.means(c)).square().sum() / n;
      const double sd = std::sqrt(var);
      s.stddevs(c) = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }

  Eigen::Index size() const { return means.size(); }

  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - means.transpose()).array().rowwise() / stddevs.transpose().array();
  }

  Eigen::VectorXd transform_row(const Eigen::VectorXd& x) const {
    return (x - means).cwiseQuotient(stddevs);
  }

  friend bool operator==(const Standardizer& a, const Standardizer& b) {
    return a.means == b.means && a.stddevs == b.stddevs;
  }
};

}  // namespace mmw
