#pragma once

#include <cmath>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/dataset/labels.hpp"
#include "mmw/kitsune/model.hpp"

namespace mmw::kitsune {

struct CalibrationPoint {
  double feet = 0.0;
  double mean_rmse = 0.0;
};

/// feet = slope * rmse + intercept
struct DistanceRegression {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<CalibrationPoint> points;

  double predict_feet(double rmse) const { return slope * rmse + intercept; }

  nlohmann::json to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) pts.push_back({{"feet", p.feet}, {"mean_rmse", p.mean_rmse}});
    return {{"slope", slope}, {"intercept", intercept}, {"r_squared", r_squared}, {"points", std::move(pts)}};
  }
  static DistanceRegression from_json(const nlohmann::json& j) {
    DistanceRegression r;
    r.slope = j.at("slope").get<double>();
    r.intercept = j.at("intercept").get<double>();
    r.r_squared = j.at("r_squared").get<double>();
    for (const auto& p : j.at("points")) r.points.push_back({p.at("feet").get<double>(), p.at("mean_rmse").get<double>()});
    return r;
  }
};

/// Ordinary least squares of distance on mean RMSE.
inline DistanceRegression fit_distance_regression(const std::vector<CalibrationPoint>& calib) {
  std::set<double> distinct;
  for (const auto& p : calib) {
    if (!std::isfinite(p.feet) || !std::isfinite(p.mean_rmse)) throw FitError("non-finite calibration point");
    distinct.insert(p.feet);
  }
  if (distinct.size() < 2) throw FitError("distance regression needs at least 2 distinct distances");
  const double n = static_cast<double>(calib.size());
  double mx = 0, my = 0;
  for (const auto& p : calib) {
    mx += p.mean_rmse;
    my += p.feet;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : calib) {
    sxx += (p.mean_rmse - mx) * (p.mean_rmse - mx);
    sxy += (p.mean_rmse - mx) * (p.feet - my);
    syy += (p.feet - my) * (p.feet - my);
  }
  if (!(sxx > 1e-300)) throw FitError("degenerate regression: mean RMSE is constant across distances");
  DistanceRegression r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss_res = 0;
  for (const auto& p : calib) {
    const double e = p.feet - r.predict_feet(p.mean_rmse);
    ss_res += e * e;
  }
  r.r_squared = 1.0 - ss_res / syy;
  r.points = calib;
  return r;
}

/// Mean execute() RMSE of `model` over the rows of each distance class present.
inline std::vector<CalibrationPoint> mean_rmse_by_distance(const KitsuneModel& model, const Eigen::MatrixXd& x,
                                                           const std::vector<ClassLabel>& labels) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ConfigError("feature rows and labels differ in length");
  std::vector<double> sum(kDistanceCount, 0.0);
  std::vector<std::size_t> count(kDistanceCount, 0);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const auto d = labels[static_cast<std::size_t>(r)].distance_index();
    sum[d] += model.execute(x.row(r).transpose());
    ++count[d];
  }
  std::vector<CalibrationPoint> out;
  for (std::size_t d = 0; d < kDistanceCount; ++d) {
    if (count[d] > 0) out.push_back({static_cast<double>(kDistanceFeet[d]), sum[d] / static_cast<double>(count[d])});
  }
  return out;
}

}  // namespace mmw::kitsune
