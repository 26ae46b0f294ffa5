#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "mmw/core/error.hpp"

namespace mmw::kitsune {

/// Partition of input indices; each cluster sorted ascending, clusters ordered by first index.
using FeatureMap = std::vector<std::vector<std::size_t>>;

/// 1 - |Pearson correlation|; a constant feature is uncorrelated with every other.
inline Eigen::MatrixXd correlation_distance(const Eigen::MatrixXd& samples) {
  const Eigen::Index d = samples.cols();
  const Eigen::MatrixXd centred = samples.rowwise() - samples.colwise().mean();
  const Eigen::MatrixXd cov = centred.transpose() * centred;
  Eigen::MatrixXd dist(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) {
        dist(i, j) = 0.0;
        continue;
      }
      const double denom = std::sqrt(cov(i, i) * cov(j, j));
      const double rho = denom > 0.0 ? cov(i, j) / denom : 0.0;
      dist(i, j) = std::max(0.0, 1.0 - std::abs(rho));
    }
  }
  return dist;
}

namespace feature_map_detail {

struct Node {
  std::vector<std::size_t> members;  // sorted
  std::unique_ptr<Node> left, right;
};

inline void cut(const Node& node, std::size_t max_size, FeatureMap& out) {
  if (node.members.size() <= max_size || !node.left) {
    out.push_back(node.members);
    return;
  }
  cut(*node.left, max_size, out);
  cut(*node.right, max_size, out);
}

}  // namespace feature_map_detail

/// Single-linkage agglomerative clustering on correlation distance, then a
/// top-down cut of the dendrogram until every cluster has at most `max_size`
/// members. Ties merge the pair with the lowest leading indices first.
inline FeatureMap feature_map_fit(const Eigen::MatrixXd& prefix, std::size_t max_size) {
  using feature_map_detail::Node;
  if (max_size < 1) throw ConfigError("feature map: max cluster size must be >= 1");
  if (prefix.rows() < 2) throw ConfigError("feature map: need at least 2 prefix samples");
  const auto d = static_cast<std::size_t>(prefix.cols());
  if (d == 0) throw ConfigError("feature map: no features");
  const Eigen::MatrixXd dist = correlation_distance(prefix);

  std::vector<std::unique_ptr<Node>> active;
  for (std::size_t i = 0; i < d; ++i) {
    auto n = std::make_unique<Node>();
    n->members = {i};
    active.push_back(std::move(n));
  }
  auto linkage = [&](const Node& a, const Node& b) {
    double best = std::numeric_limits<double>::infinity();
    for (auto i : a.members)
      for (auto j : b.members) best = std::min(best, dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    return best;
  };
  while (active.size() > 1) {
    // `active` stays ordered by leading member, so the scan order is the tie order.
    std::size_t ba = 0, bb = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double l = linkage(*active[a], *active[b]);
        if (l < best) {
          best = l;
          ba = a;
          bb = b;
        }
      }
    }
    auto merged = std::make_unique<Node>();
    merged->members = active[ba]->members;
    merged->members.insert(merged->members.end(), active[bb]->members.begin(), active[bb]->members.end());
    std::sort(merged->members.begin(), merged->members.end());
    merged->left = std::move(active[ba]);
    merged->right = std::move(active[bb]);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bb));
    active[ba] = std::move(merged);
  }

  FeatureMap out;
  feature_map_detail::cut(*active.front(), max_size, out);
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

/// True when `map` covers 0..dim-1 exactly once.
inline bool is_partition(const FeatureMap& map, std::size_t dim) {
  std::vector<int> seen(dim, 0);
  for (const auto& c : map) {
    if (c.empty()) return false;
    for (auto i : c) {
      if (i >= dim || seen[i]++) return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

}  // namespace mmw::kitsune
