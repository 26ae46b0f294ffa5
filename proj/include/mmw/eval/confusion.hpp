#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/dataset/labels.hpp"

namespace mmw::eval {

/// counts[i][j] = rows with truth class_ids[i] predicted as class_ids[j].
struct ConfusionMatrix {
  std::vector<std::size_t> class_ids;
  std::vector<std::string> class_names;
  std::vector<std::vector<std::uint64_t>> counts;

  std::size_t size() const { return class_ids.size(); }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& r : counts)
      for (auto c : r) t += c;
    return t;
  }
  std::uint64_t correct() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
    return t;
  }
  std::uint64_t support(std::size_t row) const {
    std::uint64_t t = 0;
    for (auto c : counts[row]) t += c;
    return t;
  }
  /// trace / total; NaN for an empty matrix.
  double accuracy() const {
    const auto n = total();
    return n == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(correct()) / static_cast<double>(n);
  }

  std::size_t position(std::size_t id) const {
    for (std::size_t i = 0; i < class_ids.size(); ++i) {
      if (class_ids[i] == id) return i;
    }
    throw LabelError("class " + std::to_string(id) + " is not in the confusion matrix");
  }

  /// Adds this matrix cell-wise into `into`, matching classes by id.
  void accumulate_into(ConfusionMatrix& into) const {
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j) into.counts[into.position(class_ids[i])][into.position(class_ids[j])] += counts[i][j];
  }

  /// Grid with a header row and column of class names.
  void write_csv(std::ostream& out) const {
    out << "truth\\predicted";
    for (const auto& n : class_names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < size(); ++i) {
      out << class_names[i];
      for (auto c : counts[i]) out << ',' << c;
      out << '\n';
    }
  }

  nlohmann::json to_json() const {
    return {{"classes", class_names}, {"class_ids", class_ids}, {"counts", counts}};
  }
  static ConfusionMatrix from_json(const nlohmann::json& j) {
    ConfusionMatrix m{j.at("class_ids").get<std::vector<std::size_t>>(), j.at("classes").get<std::vector<std::string>>(),
                      j.at("counts").get<std::vector<std::vector<std::uint64_t>>>()};
    if (m.class_names.size() != m.class_ids.size() || m.counts.size() != m.class_ids.size()) {
      throw ConfigError("confusion matrix is malformed");
    }
    for (const auto& r : m.counts) {
      if (r.size() != m.class_ids.size()) throw ConfigError("confusion matrix is not square");
    }
    return m;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix empty_confusion(std::vector<std::size_t> ids, std::vector<std::string> names) {
  if (ids.size() != names.size()) throw ConfigError("class ids and names differ in length");
  const auto n = ids.size();
  return {std::move(ids), std::move(names), std::vector<std::vector<std::uint64_t>>(n, std::vector<std::uint64_t>(n, 0))};
}

/// Matrix over all classes of `target`.
inline ConfusionMatrix empty_confusion(Target target) {
  std::vector<std::size_t> ids;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < class_count(target); ++i) {
    ids.push_back(i);
    names.push_back(class_name(target, i));
  }
  return empty_confusion(std::move(ids), std::move(names));
}

inline ConfusionMatrix confusion(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& truth,
                                 ConfusionMatrix m) {
  if (preds.size() != truth.size()) throw ConfigError("predictions and truth differ in length");
  for (std::size_t t = 0; t < preds.size(); ++t) ++m.counts[m.position(truth[t])][m.position(preds[t])];
  return m;
}

inline ConfusionMatrix confusion(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& truth,
                                 Target target) {
  return confusion(preds, truth, empty_confusion(target));
}

/// Fraction of off-diagonal mass within one class position of the diagonal; NaN without errors.
inline double adjacent_error_fraction(const ConfusionMatrix& m) {
  std::uint64_t errors = 0, adjacent = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (i == j) continue;
      errors += m.counts[i][j];
      if (i + 1 == j || j + 1 == i) adjacent += m.counts[i][j];
    }
  }
  return errors == 0 ? std::numeric_limits<double>::quiet_NaN()
                     : static_cast<double>(adjacent) / static_cast<double>(errors);
}

}  // namespace mmw::eval
