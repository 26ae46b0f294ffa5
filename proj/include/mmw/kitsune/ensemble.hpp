#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/core/json_eigen.hpp"
#include "mmw/core/random.hpp"
#include "mmw/dataset/labels.hpp"
#include "mmw/kitsune/model.hpp"

namespace mmw::kitsune {

struct Classification {
  std::size_t label = 0;       // class index within the target
  std::vector<double> scores;  // one RMSE per ensemble member, in `classes` order
};

/// Index of the smallest score; ties go to the lowest index.
inline std::size_t argmin_index(const std::vector<double>& scores) {
  if (scores.empty()) throw ConfigError("no scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] < scores[best]) best = i;
  }
  return best;
}

/// One KitsuneModel per class; prediction is the class with the lowest RMSE.
struct KitsuneEnsemble {
  Target target = Target::Joint;
  KitsuneConfig config;
  std::vector<std::size_t> classes;  // ascending
  std::vector<KitsuneModel> models;

  std::uint64_t samples_trained() const {
    std::uint64_t n = 0;
    for (const auto& m : models) n += m.samples_trained();
    return n;
  }

  Classification classify(const Eigen::VectorXd& x) const {
    if (models.empty()) throw ConfigError("empty kitsune ensemble");
    Classification out;
    out.scores.reserve(models.size());
    for (const auto& m : models) out.scores.push_back(m.execute(x));
    out.label = classes[argmin_index(out.scores)];
    return out;
  }

  std::vector<std::size_t> predict(const Eigen::MatrixXd& x) const {
    std::vector<std::size_t> out;
    out.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) out.push_back(classify(x.row(r).transpose()).label);
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : models) ms.push_back(m.to_json());
    return {{"target", to_string(target)}, {"config", config.to_json()}, {"classes", classes}, {"models", std::move(ms)}};
  }

  static KitsuneEnsemble from_json(const nlohmann::json& j) {
    KitsuneEnsemble e;
    const auto t = target_from_string(j.at("target").get<std::string>());
    if (!t) throw ConfigError("unknown target in kitsune ensemble");
    e.target = *t;
    e.config = KitsuneConfig::from_json(j.at("config"));
    e.classes = j.at("classes").get<std::vector<std::size_t>>();
    for (const auto& m : j.at("models")) e.models.push_back(KitsuneModel::from_json(m));
    if (e.classes.size() != e.models.size() || e.classes.empty()) throw ConfigError("kitsune ensemble is malformed");
    for (auto c : e.classes) {
      if (c >= class_count(e.target)) throw ConfigError("kitsune ensemble class out of range");
    }
    return e;
  }
};

/// Trains a model on rows in order, fitting its feature map on the first
/// `fm_prefix` of them. Every row is consumed by train() exactly once.
inline KitsuneModel train_class_model(const Eigen::MatrixXd& rows, const KitsuneConfig& config, std::uint64_t seed) {
  if (static_cast<std::size_t>(rows.rows()) < config.fm_prefix) {
    throw FitError("class has " + std::to_string(rows.rows()) + " rows, fewer than fm_prefix " +
                   std::to_string(config.fm_prefix));
  }
  auto model = KitsuneModel::from_prefix(rows.topRows(static_cast<Eigen::Index>(config.fm_prefix)), config, seed);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) model.train(rows.row(r).transpose());
  return model;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first failure by index.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::vector<std::exception_ptr> errors(n);
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Trains one model per class present in `labels`. Results do not depend on `jobs`.
inline KitsuneEnsemble ensemble_train(const Eigen::MatrixXd& x, const std::vector<std::size_t>& labels, Target target,
                                      const KitsuneConfig& config, std::uint64_t seed, std::size_t jobs = 1) {
  config.validate();
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ConfigError("feature rows and labels differ in length");
  if (labels.empty()) throw FitError("no training rows");
  KitsuneEnsemble e;
  e.target = target;
  e.config = config;
  e.classes = labels;
  std::sort(e.classes.begin(), e.classes.end());
  e.classes.erase(std::unique(e.classes.begin(), e.classes.end()), e.classes.end());
  for (auto c : e.classes) {
    if (c >= class_count(target)) throw ConfigError("label out of range for target " + to_string(target));
  }
  e.models.resize(e.classes.size());
  parallel_for(e.classes.size(), jobs, [&](std::size_t i) {
    std::vector<Eigen::Index> idx;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (labels[r] == e.classes[i]) idx.push_back(static_cast<Eigen::Index>(r));
    }
    const Eigen::MatrixXd rows = x(idx, Eigen::all);
    try {
      e.models[i] = train_class_model(rows, config, mix_seed(seed, e.classes[i]));
    } catch (const FitError& err) {
      throw FitError(class_name(target, e.classes[i]) + ": " + err.what());
    }
  });
  return e;
}

/// Angle classifiers trained separately within each distance class.
struct AnglePerDistance {
  std::vector<std::size_t> distances;  // distance indices that have an ensemble
  std::vector<KitsuneEnsemble> ensembles;

  const KitsuneEnsemble* for_distance(std::size_t d) const {
    for (std::size_t i = 0; i < distances.size(); ++i) {
      if (distances[i] == d) return &ensembles[i];
    }
    return nullptr;
  }

  nlohmann::json to_json() const {
    nlohmann::json es = nlohmann::json::array();
    for (const auto& e : ensembles) es.push_back(e.to_json());
    return {{"distances", distances}, {"ensembles", std::move(es)}};
  }
  static AnglePerDistance from_json(const nlohmann::json& j) {
    AnglePerDistance a;
    a.distances = j.at("distances").get<std::vector<std::size_t>>();
    for (const auto& e : j.at("ensembles")) a.ensembles.push_back(KitsuneEnsemble::from_json(e));
    if (a.distances.size() != a.ensembles.size()) throw ConfigError("angle-per-distance bundle is malformed");
    return a;
  }
};

inline AnglePerDistance angle_per_distance_train(const Eigen::MatrixXd& x, const std::vector<ClassLabel>& labels,
                                                 const KitsuneConfig& config, std::uint64_t seed,
                                                 std::size_t jobs = 1) {
  AnglePerDistance out;
  for (std::size_t d = 0; d < kDistanceCount; ++d) {
    std::vector<Eigen::Index> idx;
    std::vector<std::size_t> angle;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (labels[r].distance_index() == d) {
        idx.push_back(static_cast<Eigen::Index>(r));
        angle.push_back(labels[r].angle_index());
      }
    }
    if (idx.empty()) continue;
    out.distances.push_back(d);
    out.ensembles.push_back(ensemble_train(x(idx, Eigen::all), angle, Target::Angle, config, mix_seed(seed, 100 + d), jobs));
  }
  if (out.distances.empty()) throw FitError("no training rows");
  return out;
}

}  // namespace mmw::kitsune
