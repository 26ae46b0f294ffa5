#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmw/core/error.hpp"
#include "mmw/core/log.hpp"

namespace mmw {

struct PcaComponents {
  Eigen::MatrixXd projection;  // d x k, orthonormal columns
  Eigen::VectorXd variances;   // all d eigenvalues, nonincreasing
  Eigen::Index rank = 0;
};

/// Population covariance of already-centred-or-not rows (centres internally).
inline Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd centred = x.rowwise() - x.colwise().mean();
  return (centred.transpose() * centred) / static_cast<double>(x.rows());
}

/// Flips each column so its largest-magnitude entry (first on ties) is positive.
inline void canonicalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    for (Eigen::Index r = 1; r < vectors.rows(); ++r) {
      if (std::abs(vectors(r, c)) > std::abs(vectors(arg, c))) arg = r;
    }
    if (vectors(arg, c) < 0.0) vectors.col(c) *= -1.0;
  }
}

/// Top-k eigenvectors of the covariance of `x` (rows are samples).
inline PcaComponents pca_components(const Eigen::MatrixXd& x, Eigen::Index k) {
  const Eigen::Index d = x.cols();
  if (k < 1 || k > d) throw ConfigError("pca: k must be in [1, " + std::to_string(d) + "]");
  if (x.rows() <= k) {
    throw FitError("pca: need more rows than components (" + std::to_string(x.rows()) + " <= " +
                   std::to_string(k) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance(x));
  if (solver.info() != Eigen::Success) throw FitError("pca: eigendecomposition failed");

  // Eigen returns ascending eigenvalues; reorder descending, stable on index.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::VectorXd& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return ev(a) > ev(b); });

  PcaComponents out;
  out.variances.resize(d);
  Eigen::MatrixXd all(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    out.variances(i) = std::max(ev(order[static_cast<std::size_t>(i)]), 0.0);
    all.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }
  canonicalize_signs(all);
  out.projection = all.leftCols(k);

  const double top = out.variances.size() > 0 ? out.variances(0) : 0.0;
  out.rank = (out.variances.array() > 1e-10 * std::max(top, 1e-300)).count();
  if (k > out.rank) {
    log::warn("pca: k=" + std::to_string(k) + " exceeds data rank " + std::to_string(out.rank) +
              "; trailing components have zero variance");
  }
  return out;
}

}  // namespace mmw
