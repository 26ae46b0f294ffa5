#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/dataset/dataset.hpp"
#include "mmw/features/matrix.hpp"
#include "mmw/features/mrmr.hpp"
#include "mmw/features/pca.hpp"
#include "mmw/features/standardizer.hpp"

namespace mmw {

enum class PipelineKind { Empirical, Mrmr, Pca };

inline std::string to_string(PipelineKind k) {
  switch (k) {
    case PipelineKind::Empirical: return "empirical";
    case PipelineKind::Mrmr: return "mrmr";
    case PipelineKind::Pca: return "pca";
  }
  return {};
}

inline PipelineKind pipeline_kind_from_string(const std::string& s) {
  if (s == "empirical") return PipelineKind::Empirical;
  if (s == "mrmr") return PipelineKind::Mrmr;
  if (s == "pca") return PipelineKind::Pca;
  throw ConfigError("unknown pipeline kind '" + s + "'");
}

inline constexpr int kPipelineFormatVersion = 1;
inline constexpr std::size_t kDefaultSelectionK = 10;
inline constexpr int kDefaultMrmrBins = 10;

/// A fitted transform from raw link statistics to model inputs.
/// The standardizer always covers every schema feature.
struct FeaturePipeline {
  PipelineKind kind = PipelineKind::Empirical;
  std::vector<std::string> schema_names;
  std::string schema_version;
  Standardizer standardizer;
  std::vector<std::size_t> selected_indices;  // Empirical, Mrmr
  Eigen::MatrixXd projection;                 // Pca: d x k
  Eigen::VectorXd component_variances;        // Pca: k leading eigenvalues
  double total_variance = 0.0;                // Pca: sum of all eigenvalues

  std::size_t k() const {
    return kind == PipelineKind::Pca ? static_cast<std::size_t>(projection.cols()) : selected_indices.size();
  }

  std::vector<std::string> output_names() const {
    std::vector<std::string> out;
    if (kind == PipelineKind::Pca) {
      for (std::size_t i = 0; i < k(); ++i) out.push_back("pc" + std::to_string(i + 1));
    } else {
      for (auto i : selected_indices) out.push_back(schema_names.at(i));
    }
    return out;
  }

  void check_schema(const LinkStatsSchema& schema) const {
    if (schema.feature_names() != schema_names) {
      for (std::size_t i = 0; i < std::min(schema.size(), schema_names.size()); ++i) {
        if (schema.feature_names()[i] != schema_names[i]) {
          throw SchemaError("pipeline was fitted on a different schema: feature " + std::to_string(i) + " is '" +
                            schema.feature_names()[i] + "', expected '" + schema_names[i] + "'");
        }
      }
      throw SchemaError("pipeline was fitted on a schema of a different width");
    }
  }

  /// Transforms raw rows (n x d) to model inputs (n x k).
  Eigen::MatrixXd transform(const Eigen::MatrixXd& raw) const {
    if (raw.cols() != static_cast<Eigen::Index>(schema_names.size())) {
      throw InputError("transform: expected " + std::to_string(schema_names.size()) + " columns");
    }
    const Eigen::MatrixXd z = standardizer.transform(raw);
    if (kind == PipelineKind::Pca) return z * projection;
    Eigen::MatrixXd out(raw.rows(), static_cast<Eigen::Index>(selected_indices.size()));
    for (std::size_t j = 0; j < selected_indices.size(); ++j) {
      out.col(static_cast<Eigen::Index>(j)) = z.col(static_cast<Eigen::Index>(selected_indices[j]));
    }
    return out;
  }

  FeatureMatrix apply(const LabeledDataset& ds) const {
    check_schema(ds.schema);
    return FeatureMatrix{transform(to_matrix(ds)), ds.labels, ds.capture_ids, output_names()};
  }

  Eigen::MatrixXd apply(const HeldoutDataset& ds) const {
    check_schema(ds.schema);
    Eigen::MatrixXd raw(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(ds.schema.size()));
    for (std::size_t i = 0; i < ds.size(); ++i) {
      for (std::size_t f = 0; f < ds.schema.size(); ++f) {
        raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = ds.records[i].values[f];
      }
    }
    return transform(raw);
  }

  nlohmann::json to_json() const {
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    nlohmann::json j = {{"format", "mmw.feature_pipeline"},
                        {"version", kPipelineFormatVersion},
                        {"kind", to_string(kind)},
                        {"k", k()},
                        {"schema", {{"version", schema_version}, {"features", schema_names}}},
                        {"means", vec(standardizer.means)},
                        {"stddevs", vec(standardizer.stddevs)}};
    if (kind == PipelineKind::Pca) {
      std::vector<double> rm;
      rm.reserve(static_cast<std::size_t>(projection.size()));
      for (Eigen::Index r = 0; r < projection.rows(); ++r)
        for (Eigen::Index c = 0; c < projection.cols(); ++c) rm.push_back(projection(r, c));
      j["projection"] = {{"rows", projection.rows()}, {"cols", projection.cols()}, {"data", rm}};
      j["component_variances"] = vec(component_variances);
      j["total_variance"] = total_variance;
    } else {
      j["indices"] = selected_indices;
    }
    return j;
  }

  static FeaturePipeline from_json(const nlohmann::json& j) {
    try {
      if (j.at("format") != "mmw.feature_pipeline") throw ConfigError("not a feature pipeline file");
      if (j.at("version").get<int>() != kPipelineFormatVersion) throw ConfigError("unsupported pipeline version");
      FeaturePipeline p;
      p.kind = pipeline_kind_from_string(j.at("kind").get<std::string>());
      p.schema_names = j.at("schema").at("features").get<std::vector<std::string>>();
      p.schema_version = j.at("schema").at("version").get<std::string>();
      auto load_vec = [](const nlohmann::json& a) {
        auto v = a.get<std::vector<double>>();
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
      };
      p.standardizer.means = load_vec(j.at("means"));
      p.standardizer.stddevs = load_vec(j.at("stddevs"));
      const auto d = static_cast<Eigen::Index>(p.schema_names.size());
      if (p.standardizer.means.size() != d || p.standardizer.stddevs.size() != d) {
        throw ConfigError("standardizer width does not match schema");
      }
      if (p.kind == PipelineKind::Pca) {
        const auto& pj = j.at("projection");
        const auto rows = pj.at("rows").get<Eigen::Index>(), cols = pj.at("cols").get<Eigen::Index>();
        auto data = pj.at("data").get<std::vector<double>>();
        if (rows != d || static_cast<Eigen::Index>(data.size()) != rows * cols) {
          throw ConfigError("projection shape mismatch");
        }
        p.projection.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
          for (Eigen::Index c = 0; c < cols; ++c) p.projection(r, c) = data[static_cast<std::size_t>(r * cols + c)];
        p.component_variances = load_vec(j.at("component_variances"));
        p.total_variance = j.at("total_variance").get<double>();
      } else {
        p.selected_indices = j.at("indices").get<std::vector<std::size_t>>();
        for (auto i : p.selected_indices) {
          if (i >= p.schema_names.size()) throw ConfigError("selected index out of range");
        }
      }
      if (j.at("k").get<std::size_t>() != p.k()) throw ConfigError("k does not match pipeline contents");
      return p;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed pipeline JSON: ") + e.what());
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << to_json().dump(2) << '\n';
    if (!out) throw IoError("write to '" + path + "' failed");
  }

  static FeaturePipeline load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("pipeline '" + path + "': " + e.what());
    }
  }
};

inline Standardizer fit_standardizer(const LabeledDataset& train) {
  if (train.empty()) throw FitError("cannot fit a standardizer on an empty dataset");
  return Standardizer::fit(to_matrix(train));
}

namespace pipeline_detail {
inline FeaturePipeline base(PipelineKind kind, const LabeledDataset& train, Standardizer s) {
  FeaturePipeline p;
  p.kind = kind;
  p.schema_names = train.schema.feature_names();
  p.schema_version = train.schema.version();
  p.standardizer = std::move(s);
  return p;
}
}  // namespace pipeline_detail

/// The six received-power and SNR gauges, in their canonical order.
inline FeaturePipeline empirical_select(const LabeledDataset& train) {
  auto p = pipeline_detail::base(PipelineKind::Empirical, train, fit_standardizer(train));
  for (auto name : kEmpiricalFeatures) p.selected_indices.push_back(train.schema.require_index(name));
  return p;
}

/// MRMR on raw values (binning is scale-free), against the 20 joint classes.
inline FeaturePipeline mrmr_select(const LabeledDataset& train, std::size_t k, int bins = kDefaultMrmrBins) {
  if (k < 1 || k > train.schema.size()) {
    throw ConfigError("mrmr: k must be in [1, " + std::to_string(train.schema.size()) + "], got " +
                      std::to_string(k));
  }
  if (bins < 2) throw ConfigError("mrmr: bins must be >= 2");
  if (train.size() < 2) throw FitError("mrmr: need at least 2 rows");
  std::vector<Discretized> cols;
  std::vector<double> column(train.size());
  for (std::size_t f = 0; f < train.schema.size(); ++f) {
    for (std::size_t i = 0; i < train.size(); ++i) column[i] = train.records[i].values[f];
    cols.push_back(equal_frequency_bins(column, bins));
  }
  Discretized label{std::vector<int>(train.size()), static_cast<int>(kJointCount)};
  for (std::size_t i = 0; i < train.size(); ++i) label.codes[i] = static_cast<int>(train.labels[i].joint_index());
  auto p = pipeline_detail::base(PipelineKind::Mrmr, train, fit_standardizer(train));
  p.selected_indices = mrmr_rank(cols, label, k).selected;
  return p;
}

/// PCA on the standardized (correlation) matrix.
inline FeaturePipeline pca_fit(const LabeledDataset& train, std::size_t k, const Standardizer& standardizer) {
  if (standardizer.size() != static_cast<Eigen::Index>(train.schema.size())) {
    throw ConfigError("pca: standardizer width does not match schema");
  }
  auto comps = pca_components(standardizer.transform(to_matrix(train)), static_cast<Eigen::Index>(k));
  auto p = pipeline_detail::base(PipelineKind::Pca, train, standardizer);
  p.projection = std::move(comps.projection);
  p.component_variances = comps.variances.head(static_cast<Eigen::Index>(k));
  p.total_variance = comps.variances.sum();
  return p;
}

inline FeaturePipeline pca_fit(const LabeledDataset& train, std::size_t k) {
  return pca_fit(train, k, fit_standardizer(train));
}

/// Cumulative explained-variance ratio for k = 1..d of the standardized data.
inline std::vector<std::pair<std::size_t, double>> explained_variance_curve(const Eigen::VectorXd& eigenvalues) {
  std::vector<std::pair<std::size_t, double>> out;
  const double total = eigenvalues.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    acc += eigenvalues(i);
    out.emplace_back(static_cast<std::size_t>(i + 1), total > 0.0 ? acc / total : 0.0);
  }
  return out;
}

inline std::vector<std::pair<std::size_t, double>> explained_variance_curve(const LabeledDataset& train) {
  const auto s = fit_standardizer(train);
  const auto comps =
      pca_components(s.transform(to_matrix(train)), static_cast<Eigen::Index>(train.schema.size()));
  return explained_variance_curve(comps.variances);
}

}  // namespace mmw
