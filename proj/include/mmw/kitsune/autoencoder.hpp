#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/core/json_eigen.hpp"

namespace mmw::kitsune {

/// Error signal driving the decoder update.
enum class ReconstructionLoss {
  /// delta = x - z, the cross-entropy gradient for sigmoid outputs (reference KitNET rule).
  CrossEntropy,
  /// delta = (x - z) * z * (1 - z).
  SquaredError,
};

inline std::string to_string(ReconstructionLoss l) {
  return l == ReconstructionLoss::CrossEntropy ? "cross_entropy" : "squared_error";
}

inline ReconstructionLoss loss_from_string(const std::string& s) {
  if (s == "cross_entropy") return ReconstructionLoss::CrossEntropy;
  if (s == "squared_error") return ReconstructionLoss::SquaredError;
  throw ConfigError("unknown reconstruction loss '" + s + "'");
}

struct AutoencoderConfig {
  double hidden_ratio = 0.75;
  double learning_rate = 0.1;
  /// Step size eta / sqrt(t) at the t-th update when set, constant eta otherwise.
  bool decay = true;
  ReconstructionLoss loss = ReconstructionLoss::CrossEntropy;
  /// Clamp scaled inputs to [0, 1]; off lets out-of-range values land outside the sigmoid range.
  bool clamp = true;

  void validate() const {
    if (!(hidden_ratio > 0.0) || !std::isfinite(hidden_ratio)) throw ConfigError("hidden_ratio must be > 0");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
  }

  nlohmann::json to_json() const {
    return {{"hidden_ratio", hidden_ratio}, {"learning_rate", learning_rate}, {"decay", decay},
            {"loss", to_string(loss)}, {"clamp", clamp}};
  }
  static AutoencoderConfig from_json(const nlohmann::json& j) {
    AutoencoderConfig c;
    c.hidden_ratio = j.at("hidden_ratio").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.decay = j.at("decay").get<bool>();
    c.loss = loss_from_string(j.at("loss").get<std::string>());
    c.clamp = j.at("clamp").get<bool>();
    c.validate();
    return c;
  }
};

inline Eigen::Index hidden_size(Eigen::Index visible, double ratio) {
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(ratio * static_cast<double>(visible))));
}

/// Tied-weight sigmoid autoencoder with running min-max input scaling.
class Autoencoder {
 public:
  Autoencoder() = default;

  Autoencoder(Eigen::Index visible, const AutoencoderConfig& config, std::mt19937_64& rng) : config_(config) {
    if (visible < 1) throw ConfigError("autoencoder needs at least one input");
    config_.validate();
    const Eigen::Index hidden = hidden_size(visible, config.hidden_ratio);
    const double a = 1.0 / std::sqrt(static_cast<double>(visible));
    std::uniform_real_distribution<double> init(-a, a);
    weights_.resize(visible, hidden);
    for (Eigen::Index c = 0; c < hidden; ++c)
      for (Eigen::Index r = 0; r < visible; ++r) weights_(r, c) = init(rng);
    hidden_bias_ = Eigen::VectorXd::Zero(hidden);
    visible_bias_ = Eigen::VectorXd::Zero(visible);
    min_ = Eigen::VectorXd::Zero(visible);
    max_ = Eigen::VectorXd::Zero(visible);
  }

  Eigen::Index visible() const { return weights_.rows(); }
  Eigen::Index hidden() const { return weights_.cols(); }
  std::uint64_t updates() const { return updates_; }
  const AutoencoderConfig& config() const { return config_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& hidden_bias() const { return hidden_bias_; }
  const Eigen::VectorXd& visible_bias() const { return visible_bias_; }

  /// Maps x into [0, 1] using the ranges seen in training. Values outside the
  /// seen range are clamped (unless disabled); before any training everything maps to 0.
  Eigen::VectorXd scale(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (updates_ == 0) {
        out(i) = 0.0;
        continue;
      }
      const double range = max_(i) - min_(i);
      double v;
      if (range > 0.0) {
        v = (x(i) - min_(i)) / range;
      } else {
        v = x(i) > max_(i) ? 1.0 : 0.0;
      }
      out(i) = config_.clamp ? std::clamp(v, 0.0, 1.0) : v;
    }
    return out;
  }

  /// One SGD step on x; returns the reconstruction RMSE measured before the step.
  double train(const Eigen::VectorXd& x) {
    if (updates_ == 0) {
      min_ = x;
      max_ = x;
    } else {
      min_ = min_.cwiseMin(x);
      max_ = max_.cwiseMax(x);
    }
    ++updates_;
    const Eigen::VectorXd in = scale(x);
    const Eigen::VectorXd h = sigmoid(weights_.transpose() * in + hidden_bias_);
    const Eigen::VectorXd z = sigmoid(weights_ * h + visible_bias_);
    const Eigen::VectorXd err = in - z;
    Eigen::VectorXd delta_out = err;
    if (config_.loss == ReconstructionLoss::SquaredError) {
      delta_out = err.array() * z.array() * (1.0 - z.array());
    }
    const Eigen::VectorXd delta_hidden =
        ((weights_.transpose() * delta_out).array() * h.array() * (1.0 - h.array())).matrix();
    const double lr = config_.decay ? config_.learning_rate / std::sqrt(static_cast<double>(updates_))
                                    : config_.learning_rate;
    weights_.noalias() += lr * (in * delta_hidden.transpose() + delta_out * h.transpose());
    hidden_bias_ += lr * delta_hidden;
    visible_bias_ += lr * delta_out;
    return std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
  }

  double execute(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd in = scale(x);
    const Eigen::VectorXd h = sigmoid(weights_.transpose() * in + hidden_bias_);
    const Eigen::VectorXd z = sigmoid(weights_ * h + visible_bias_);
    return std::sqrt((in - z).squaredNorm() / static_cast<double>(in.size()));
  }

  bool parameters_finite() const {
    return weights_.allFinite() && hidden_bias_.allFinite() && visible_bias_.allFinite();
  }

  nlohmann::json to_json() const {
    return {{"visible", visible()},
            {"hidden", hidden()},
            {"config", config_.to_json()},
            {"weights", json_io::matrix(weights_)},
            {"hidden_bias", json_io::vector(hidden_bias_)},
            {"visible_bias", json_io::vector(visible_bias_)},
            {"min", json_io::vector(min_)},
            {"max", json_io::vector(max_)},
            {"updates", updates_}};
  }

  static Autoencoder from_json(const nlohmann::json& j) {
    Autoencoder a;
    a.config_ = AutoencoderConfig::from_json(j.at("config"));
    a.weights_ = json_io::to_matrix(j.at("weights"));
    a.hidden_bias_ = json_io::to_vector(j.at("hidden_bias"));
    a.visible_bias_ = json_io::to_vector(j.at("visible_bias"));
    a.min_ = json_io::to_vector(j.at("min"));
    a.max_ = json_io::to_vector(j.at("max"));
    a.updates_ = j.at("updates").get<std::uint64_t>();
    const auto v = a.weights_.rows(), h = a.weights_.cols();
    if (v != j.at("visible").get<Eigen::Index>() || h != j.at("hidden").get<Eigen::Index>() ||
        a.hidden_bias_.size() != h || a.visible_bias_.size() != v || a.min_.size() != v || a.max_.size() != v) {
      throw ConfigError("autoencoder parameter shapes are inconsistent");
    }
    return a;
  }

  friend bool operator==(const Autoencoder& a, const Autoencoder& b) {
    return a.weights_ == b.weights_ && a.hidden_bias_ == b.hidden_bias_ && a.visible_bias_ == b.visible_bias_ &&
           a.min_ == b.min_ && a.max_ == b.max_ && a.updates_ == b.updates_;
  }

 private:
  static Eigen::VectorXd sigmoid(const Eigen::VectorXd& v) {
    return (1.0 / (1.0 + (-v.array()).exp())).matrix();
  }

  AutoencoderConfig config_;
  Eigen::MatrixXd weights_;  // visible x hidden; decoder uses the transpose
  Eigen::VectorXd hidden_bias_;
  Eigen::VectorXd visible_bias_;
  Eigen::VectorXd min_;
  Eigen::VectorXd max_;
  std::uint64_t updates_ = 0;
};

}  // namespace mmw::kitsune
