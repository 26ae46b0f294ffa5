#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/kitsune/autoencoder.hpp"
#include "mmw/kitsune/feature_map.hpp"

namespace mmw::kitsune {

struct KitsuneConfig {
  std::size_t max_cluster = 10;  // m
  std::size_t fm_prefix = 200;
  AutoencoderConfig autoencoder;

  void validate() const {
    if (max_cluster < 1) throw ConfigError("m must be >= 1");
    if (fm_prefix < 2) throw ConfigError("fm_prefix must be >= 2");
    autoencoder.validate();
  }

  nlohmann::json to_json() const {
    return {{"m", max_cluster}, {"fm_prefix", fm_prefix}, {"autoencoder", autoencoder.to_json()}};
  }
  static KitsuneConfig from_json(const nlohmann::json& j) {
    KitsuneConfig c;
    c.max_cluster = j.at("m").get<std::size_t>();
    c.fm_prefix = j.at("fm_prefix").get<std::size_t>();
    c.autoencoder = AutoencoderConfig::from_json(j.at("autoencoder"));
    c.validate();
    return c;
  }
};

/// Feature-mapped ensemble of small autoencoders plus an output autoencoder
/// over the per-cluster RMSE vector.
class KitsuneModel {
 public:
  KitsuneModel() = default;

  KitsuneModel(Eigen::Index dim, FeatureMap map, const AutoencoderConfig& config, std::uint64_t seed)
      : dim_(dim), map_(std::move(map)) {
    if (!is_partition(map_, static_cast<std::size_t>(dim))) throw ConfigError("feature map is not a partition");
    std::mt19937_64 rng(seed);
    for (const auto& cluster : map_) ensemble_.emplace_back(static_cast<Eigen::Index>(cluster.size()), config, rng);
    output_ = Autoencoder(static_cast<Eigen::Index>(map_.size()), config, rng);
  }

  /// Fits the feature map on `prefix` (rows are samples) and builds an untrained model.
  static KitsuneModel from_prefix(const Eigen::MatrixXd& prefix, const KitsuneConfig& config, std::uint64_t seed) {
    config.validate();
    return KitsuneModel(prefix.cols(), feature_map_fit(prefix, config.max_cluster), config.autoencoder, seed);
  }

  Eigen::Index dim() const { return dim_; }
  const FeatureMap& feature_map() const { return map_; }
  const std::vector<Autoencoder>& ensemble_layer() const { return ensemble_; }
  const Autoencoder& output_layer() const { return output_; }
  std::uint64_t samples_trained() const { return trained_; }

  /// One online update; returns the output-layer RMSE before the update.
  double train(const Eigen::VectorXd& x) {
    check(x);
    Eigen::VectorXd errors(static_cast<Eigen::Index>(map_.size()));
    for (std::size_t c = 0; c < map_.size(); ++c) errors(static_cast<Eigen::Index>(c)) = ensemble_[c].train(slice(x, c));
    const double score = output_.train(errors);
    ++trained_;
    if (!output_.parameters_finite()) throw NumericError("kitsune parameters became non-finite");
    return score;
  }

  double execute(const Eigen::VectorXd& x) const {
    check(x);
    Eigen::VectorXd errors(static_cast<Eigen::Index>(map_.size()));
    for (std::size_t c = 0; c < map_.size(); ++c) errors(static_cast<Eigen::Index>(c)) = ensemble_[c].execute(slice(x, c));
    return output_.execute(errors);
  }

  nlohmann::json to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& ae : ensemble_) layers.push_back(ae.to_json());
    return {{"dim", dim_}, {"clusters", map_}, {"ensemble", std::move(layers)},
            {"output", output_.to_json()}, {"samples_trained", trained_}};
  }

  static KitsuneModel from_json(const nlohmann::json& j) {
    KitsuneModel m;
    m.dim_ = j.at("dim").get<Eigen::Index>();
    m.map_ = j.at("clusters").get<FeatureMap>();
    if (!is_partition(m.map_, static_cast<std::size_t>(m.dim_))) throw ConfigError("stored feature map is not a partition");
    for (const auto& l : j.at("ensemble")) m.ensemble_.push_back(Autoencoder::from_json(l));
    m.output_ = Autoencoder::from_json(j.at("output"));
    m.trained_ = j.at("samples_trained").get<std::uint64_t>();
    if (m.ensemble_.size() != m.map_.size() || m.output_.visible() != static_cast<Eigen::Index>(m.map_.size())) {
      throw ConfigError("stored kitsune layers do not match the feature map");
    }
    for (std::size_t c = 0; c < m.map_.size(); ++c) {
      if (m.ensemble_[c].visible() != static_cast<Eigen::Index>(m.map_[c].size())) {
        throw ConfigError("stored autoencoder width does not match its cluster");
      }
    }
    return m;
  }

  friend bool operator==(const KitsuneModel& a, const KitsuneModel& b) {
    return a.dim_ == b.dim_ && a.map_ == b.map_ && a.ensemble_ == b.ensemble_ && a.output_ == b.output_ &&
           a.trained_ == b.trained_;
  }

 private:
  void check(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) {
      throw InputError("kitsune input has " + std::to_string(x.size()) + " features, model expects " +
                       std::to_string(dim_));
    }
    if (!x.allFinite()) throw InputError("kitsune input contains non-finite values");
  }

  Eigen::VectorXd slice(const Eigen::VectorXd& x, std::size_t c) const {
    const auto& idx = map_[c];
    Eigen::VectorXd s(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) s(static_cast<Eigen::Index>(i)) = x(static_cast<Eigen::Index>(idx[i]));
    return s;
  }

  Eigen::Index dim_ = 0;
  FeatureMap map_;
  std::vector<Autoencoder> ensemble_;
  Autoencoder output_;
  std::uint64_t trained_ = 0;
};

}  // namespace mmw::kitsune
