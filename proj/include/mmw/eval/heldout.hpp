#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/dataset/labels.hpp"
#include "mmw/kitsune/ensemble.hpp"
#include "mmw/kitsune/regression.hpp"

namespace mmw::eval {

/// Diagnostic for rows recorded at a distance outside the trained classes.
struct HeldoutSummary {
  double feet = 0.0;
  std::uint64_t rows = 0;
  std::array<std::uint64_t, kDistanceCount> predicted_distance{};  // histogram over D10..D50
  std::optional<double> mean_rmse;                                 // from the calibration model
  std::optional<double> estimated_feet;                            // regression applied to mean_rmse

  nlohmann::json to_json() const {
    nlohmann::json hist = nlohmann::json::object();
    for (std::size_t d = 0; d < kDistanceCount; ++d) hist[distance_name(d)] = predicted_distance[d];
    return {{"feet", feet},
            {"rows", rows},
            {"predicted_distance", std::move(hist)},
            {"mean_rmse", mean_rmse ? nlohmann::json(*mean_rmse) : nlohmann::json()},
            {"estimated_feet", estimated_feet ? nlohmann::json(*estimated_feet) : nlohmann::json()}};
  }
};

inline std::size_t predicted_distance_class(const kitsune::KitsuneEnsemble& e, std::size_t label) {
  switch (e.target) {
    case Target::Distance: return label;
    case Target::Joint: return ClassLabel::from_joint(label).distance_index();
    case Target::Angle: break;
  }
  throw ConfigError("held-out probe needs a distance or joint ensemble");
}

/// Groups rows by their recorded distance; optional D10 model + regression add an RMSE-based estimate.
inline std::vector<HeldoutSummary> heldout_probe(const kitsune::KitsuneEnsemble& ensemble, const Eigen::MatrixXd& x,
                                                 const std::vector<double>& feet,
                                                 const kitsune::KitsuneModel* calibration_model = nullptr,
                                                 const kitsune::DistanceRegression* regression = nullptr) {
  if (static_cast<std::size_t>(x.rows()) != feet.size()) throw ConfigError("held-out rows and distances differ in length");
  if (ensemble.target == Target::Angle) throw ConfigError("held-out probe needs a distance or joint ensemble");
  std::map<double, HeldoutSummary> groups;
  std::map<double, double> rmse_sum;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double ft = feet[static_cast<std::size_t>(r)];
    auto& g = groups[ft];
    g.feet = ft;
    ++g.rows;
    const Eigen::VectorXd row = x.row(r).transpose();
    ++g.predicted_distance[predicted_distance_class(ensemble, ensemble.classify(row).label)];
    if (calibration_model) rmse_sum[ft] += calibration_model->execute(row);
  }
  std::vector<HeldoutSummary> out;
  for (auto& [ft, g] : groups) {
    if (calibration_model) {
      g.mean_rmse = rmse_sum[ft] / static_cast<double>(g.rows);
      if (regression) g.estimated_feet = regression->predict_feet(*g.mean_rmse);
    }
    out.push_back(g);
  }
  return out;
}

}  // namespace mmw::eval
