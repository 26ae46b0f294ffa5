#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/core/random.hpp"
#include "mmw/lstm/model.hpp"

namespace mmw::lstm {

struct TrainConfig {
  std::size_t hidden = 64;
  std::size_t epochs = 30;
  std::size_t batch = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Threads for per-batch gradients. Results are bit-identical for a fixed value.
  std::size_t jobs = 1;

  void validate() const {
    if (hidden < 1) throw ConfigError("hidden size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch < 1) throw ConfigError("batch must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must be in [0, 1)");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  }

  nlohmann::json to_json() const {
    return {{"hidden", hidden}, {"epochs", epochs}, {"batch", batch}, {"learning_rate", learning_rate},
            {"beta1", beta1},   {"beta2", beta2},   {"epsilon", epsilon}};
  }
};

class Adam {
 public:
  Adam(Eigen::Index n, double lr, double beta1, double beta2, double eps)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = b1_ * m_ + (1.0 - b1_) * grad;
    v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

  std::uint64_t steps() const { return t_; }

 private:
  double lr_, b1_, b2_, eps_;
  Eigen::VectorXd m_, v_;
  std::uint64_t t_ = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean window loss over the epoch's batches
  double val_distance_acc = std::numeric_limits<double>::quiet_NaN();
  double val_angle_acc = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  LstmModel model;
  std::vector<EpochLog> log;
};

/// Sum of per-window losses and gradients over `idx`, split into `jobs`
/// contiguous chunks whose partial sums are added in chunk order.
inline double batch_gradient(const LstmModel& model, const std::vector<Window>& windows,
                             const std::vector<std::size_t>& idx, std::size_t jobs, Eigen::VectorXd& grad) {
  const std::size_t n = idx.size();
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::vector<Eigen::VectorXd> grads(jobs, Eigen::VectorXd::Zero(model.parameters().size()));
  std::vector<double> losses(jobs, 0.0);
  auto work = [&](std::size_t j) {
    const std::size_t lo = n * j / jobs, hi = n * (j + 1) / jobs;
    for (std::size_t r = lo; r < hi; ++r) losses[j] += model.loss_and_gradient(windows[idx[r]], &grads[j]);
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(work, j);
    work(0);
    for (auto& t : pool) t.join();
  }
  grad = grads[0];
  double loss = losses[0];
  for (std::size_t j = 1; j < jobs; ++j) {
    grad += grads[j];
    loss += losses[j];
  }
  return loss;
}

struct WindowAccuracy {
  double distance = 0.0;
  double angle = 0.0;
};

inline WindowAccuracy window_accuracy(const LstmModel& model, const std::vector<Window>& windows) {
  if (windows.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  std::size_t d = 0, a = 0;
  for (const auto& w : windows) {
    const auto p = model.predict(w.x);
    d += p.distance == w.label.distance_index();
    a += p.angle == w.label.angle_index();
  }
  const double n = static_cast<double>(windows.size());
  return {static_cast<double>(d) / n, static_cast<double>(a) / n};
}

/// Mini-batch Adam on the mean window loss; epochs visit windows in a seeded shuffle.
inline TrainResult train(Architecture arch, const std::vector<Window>& windows, const TrainConfig& config,
                         std::uint64_t seed, const std::vector<Window>* validation = nullptr) {
  config.validate();
  if (windows.empty()) throw ConfigError("no training windows");
  const Eigen::Index k = windows.front().x.cols();
  for (const auto& w : windows) {
    if (w.x.cols() != k || w.x.rows() != windows.front().x.rows()) throw InputError("training windows differ in shape");
  }
  TrainResult result{LstmModel(arch, k, static_cast<Eigen::Index>(config.hidden), mix_seed(seed, 1)), {}};
  auto& model = result.model;
  Adam adam(model.parameters().size(), config.learning_rate, config.beta1, config.beta2, config.epsilon);
  std::mt19937_64 rng(mix_seed(seed, 2));
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd grad;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t s = 0; s < order.size(); s += config.batch) {
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(s),
                                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), s + config.batch)));
      const double loss = batch_gradient(model, windows, idx, config.jobs, grad);
      if (!std::isfinite(loss) || !grad.allFinite()) throw TrainingError(epoch, "loss diverged");
      total += loss;
      grad /= static_cast<double>(idx.size());
      adam.step(model.parameters(), grad);
    }
    if (!model.parameters().allFinite()) throw TrainingError(epoch, "parameters became non-finite");
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = total / static_cast<double>(windows.size());
    if (validation && !validation->empty()) {
      const auto acc = window_accuracy(model, *validation);
      entry.val_distance_acc = acc.distance;
      entry.val_angle_acc = acc.angle;
    }
    result.log.push_back(entry);
  }
  return result;
}

inline TrainResult train_multiclass(const std::vector<Window>& windows, const TrainConfig& config, std::uint64_t seed,
                                    const std::vector<Window>* validation = nullptr) {
  return train(Architecture::Multiclass, windows, config, seed, validation);
}

inline TrainResult train_multihead(const std::vector<Window>& windows, const TrainConfig& config, std::uint64_t seed,
                                   const std::vector<Window>* validation = nullptr) {
  return train(Architecture::Multihead, windows, config, seed, validation);
}

}  // namespace mmw::lstm
