#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/core/json_eigen.hpp"
#include "mmw/dataset/labels.hpp"
#include "mmw/lstm/window.hpp"

namespace mmw::lstm {

enum class Architecture { Multiclass, Multihead };

inline std::string to_string(Architecture a) { return a == Architecture::Multiclass ? "multiclass" : "multihead"; }

inline Architecture architecture_from_string(const std::string& s) {
  if (s == "multiclass") return Architecture::Multiclass;
  if (s == "multihead") return Architecture::Multihead;
  throw ConfigError("unknown architecture '" + s + "' (expected multiclass or multihead)");
}

/// Output positions 0-4 are the distance classes, 5-8 the angle classes.
inline constexpr Eigen::Index kOutputs = static_cast<Eigen::Index>(kDistanceCount + kAngleCount);
inline constexpr Eigen::Index kAngleOffset = static_cast<Eigen::Index>(kDistanceCount);

struct Prediction {
  std::size_t distance = 0;
  std::size_t angle = 0;
  /// Multihead: two softmax distributions (5 then 4). Multiclass: nine sigmoid outputs.
  Eigen::VectorXd probabilities;

  ClassLabel label() const { return {static_cast<Distance>(distance), static_cast<Angle>(angle)}; }
};

/// Activations of one forward pass, kept for backpropagation.
struct ForwardCache {
  std::vector<Eigen::VectorXd> input;  // [x_t; h_{t-1}]
  std::vector<Eigen::VectorXd> i, f, g, o, c, h;
  Eigen::VectorXd logits;
};

/// Single-layer LSTM trunk over a window followed by a linear layer on the last
/// hidden state. Gate rows are ordered input, forget, cell, output.
/// All parameters live in one flat vector so optimizers can treat them uniformly.
class LstmModel {
 public:
  LstmModel() = default;

  LstmModel(Architecture arch, Eigen::Index input, Eigen::Index hidden, std::uint64_t seed)
      : arch_(arch), k_(input), h_(hidden) {
    if (input < 1 || hidden < 1) throw ConfigError("LSTM input and hidden sizes must be >= 1");
    theta_ = Eigen::VectorXd::Zero(parameter_count(input, hidden));
    std::mt19937_64 rng(seed);
    const double a = 1.0 / std::sqrt(static_cast<double>(hidden));
    std::uniform_real_distribution<double> u(-a, a);
    for (Eigen::Index i = 0; i < theta_.size(); ++i) theta_(i) = u(rng);
    b().setZero();
    b().segment(h_, h_).setOnes();  // forget gate
    head_b().setZero();
  }

  static Eigen::Index parameter_count(Eigen::Index k, Eigen::Index h) {
    return 4 * h * (k + h) + 4 * h + kOutputs * h + kOutputs;
  }

  Architecture architecture() const { return arch_; }
  Eigen::Index input_size() const { return k_; }
  Eigen::Index hidden_size() const { return h_; }

  Eigen::VectorXd& parameters() { return theta_; }
  const Eigen::VectorXd& parameters() const { return theta_; }

  Eigen::Map<Eigen::MatrixXd> W() { return {theta_.data(), 4 * h_, k_ + h_}; }
  Eigen::Map<const Eigen::MatrixXd> W() const { return {theta_.data(), 4 * h_, k_ + h_}; }
  Eigen::Map<Eigen::VectorXd> b() { return {theta_.data() + b_offset(), 4 * h_}; }
  Eigen::Map<const Eigen::VectorXd> b() const { return {theta_.data() + b_offset(), 4 * h_}; }
  Eigen::Map<Eigen::MatrixXd> head_W() { return {theta_.data() + head_offset(), kOutputs, h_}; }
  Eigen::Map<const Eigen::MatrixXd> head_W() const { return {theta_.data() + head_offset(), kOutputs, h_}; }
  Eigen::Map<Eigen::VectorXd> head_b() { return {theta_.data() + head_offset() + kOutputs * h_, kOutputs}; }
  Eigen::Map<const Eigen::VectorXd> head_b() const {
    return {theta_.data() + head_offset() + kOutputs * h_, kOutputs};
  }

  /// Runs the trunk and output layer; returns the final hidden state.
  Eigen::VectorXd forward(const Eigen::MatrixXd& x, ForwardCache* cache = nullptr) const {
    check(x);
    const auto L = static_cast<std::size_t>(x.rows());
    const auto Wm = W();
    const auto bv = b();
    Eigen::VectorXd h = Eigen::VectorXd::Zero(h_), c = Eigen::VectorXd::Zero(h_);
    Eigen::VectorXd in(k_ + h_), z(4 * h_);
    if (cache) {
      for (auto* v : {&cache->input, &cache->i, &cache->f, &cache->g, &cache->o, &cache->c, &cache->h}) {
        v->clear();
        v->reserve(L);
      }
    }
    for (std::size_t t = 0; t < L; ++t) {
      in.head(k_) = x.row(static_cast<Eigen::Index>(t)).transpose();
      in.tail(h_) = h;
      z.noalias() = Wm * in;
      z += bv;
      const Eigen::VectorXd ig = sigmoid(z.segment(0, h_));
      const Eigen::VectorXd fg = sigmoid(z.segment(h_, h_));
      const Eigen::VectorXd gg = z.segment(2 * h_, h_).array().tanh().matrix();
      const Eigen::VectorXd og = sigmoid(z.segment(3 * h_, h_));
      c = (fg.array() * c.array() + ig.array() * gg.array()).matrix();
      h = (og.array() * c.array().tanh()).matrix();
      if (cache) {
        cache->input.push_back(in);
        cache->i.push_back(ig);
        cache->f.push_back(fg);
        cache->g.push_back(gg);
        cache->o.push_back(og);
        cache->c.push_back(c);
        cache->h.push_back(h);
      }
    }
    if (cache) cache->logits = head_W() * h + head_b();
    return h;
  }

  Eigen::VectorXd logits(const Eigen::MatrixXd& x) const { return head_W() * forward(x) + head_b(); }

  Prediction predict(const Eigen::MatrixXd& x) const { return decode(logits(x)); }

  Prediction decode(const Eigen::VectorXd& z) const {
    Prediction p;
    if (arch_ == Architecture::Multiclass) {
      p.probabilities = sigmoid(z);
    } else {
      p.probabilities.resize(kOutputs);
      p.probabilities.head(kAngleOffset) = softmax(z.head(kAngleOffset));
      p.probabilities.tail(kOutputs - kAngleOffset) = softmax(z.tail(kOutputs - kAngleOffset));
    }
    // Argmax on logits; monotone in both decodings, first index wins ties.
    p.distance = argmax(z.head(kAngleOffset));
    p.angle = argmax(z.tail(kOutputs - kAngleOffset));
    return p;
  }

  /// Loss of one window and, when `grad` is given, its gradient added into `grad`.
  double loss_and_gradient(const Window& w, Eigen::VectorXd* grad) const {
    ForwardCache cache;
    forward(w.x, &cache);
    Eigen::VectorXd dz;
    const double loss = output_loss(cache.logits, w.label, grad ? &dz : nullptr);
    if (grad) backward(cache, dz, *grad);
    return loss;
  }

  double loss(const Window& w) const { return loss_and_gradient(w, nullptr); }

  /// Loss of the output layer given logits; optionally its derivative w.r.t. the logits.
  double output_loss(const Eigen::VectorXd& z, const ClassLabel& label, Eigen::VectorXd* dz) const {
    const auto d = static_cast<Eigen::Index>(label.distance_index());
    const auto a = kAngleOffset + static_cast<Eigen::Index>(label.angle_index());
    double loss = 0.0;
    if (arch_ == Architecture::Multiclass) {
      Eigen::VectorXd y = Eigen::VectorXd::Zero(kOutputs);
      y(d) = 1.0;
      y(a) = 1.0;
      for (Eigen::Index j = 0; j < kOutputs; ++j) {
        // log(1 + e^z) - y z, written to avoid overflow
        loss += std::max(z(j), 0.0) + std::log1p(std::exp(-std::abs(z(j)))) - y(j) * z(j);
      }
      if (dz) *dz = sigmoid(z) - y;
    } else {
      const Eigen::VectorXd pd = softmax(z.head(kAngleOffset));
      const Eigen::VectorXd pa = softmax(z.tail(kOutputs - kAngleOffset));
      loss = -log_softmax_at(z.head(kAngleOffset), d) - log_softmax_at(z.tail(kOutputs - kAngleOffset), a - kAngleOffset);
      if (dz) {
        dz->resize(kOutputs);
        dz->head(kAngleOffset) = pd;
        dz->tail(kOutputs - kAngleOffset) = pa;
        (*dz)(d) -= 1.0;
        (*dz)(a) -= 1.0;
      }
    }
    return loss;
  }

  nlohmann::json to_json() const {
    return {{"architecture", to_string(arch_)},
            {"input", k_},
            {"hidden", h_},
            {"gate_order", "input,forget,cell,output"},
            {"W", json_io::matrix(W())},
            {"b", json_io::vector(b())},
            {"head_W", json_io::matrix(head_W())},
            {"head_b", json_io::vector(head_b())}};
  }

  static LstmModel from_json(const nlohmann::json& j) {
    LstmModel m;
    m.arch_ = architecture_from_string(j.at("architecture").get<std::string>());
    m.k_ = j.at("input").get<Eigen::Index>();
    m.h_ = j.at("hidden").get<Eigen::Index>();
    if (m.k_ < 1 || m.h_ < 1) throw ConfigError("stored LSTM sizes must be >= 1");
    m.theta_ = Eigen::VectorXd::Zero(parameter_count(m.k_, m.h_));
    const auto Wj = json_io::to_matrix(j.at("W"));
    const auto bj = json_io::to_vector(j.at("b"));
    const auto hW = json_io::to_matrix(j.at("head_W"));
    const auto hb = json_io::to_vector(j.at("head_b"));
    if (Wj.rows() != 4 * m.h_ || Wj.cols() != m.k_ + m.h_ || bj.size() != 4 * m.h_ || hW.rows() != kOutputs ||
        hW.cols() != m.h_ || hb.size() != kOutputs) {
      throw ConfigError("stored LSTM parameter shapes are inconsistent");
    }
    m.W() = Wj;
    m.b() = bj;
    m.head_W() = hW;
    m.head_b() = hb;
    return m;
  }

  friend bool operator==(const LstmModel& a, const LstmModel& b) {
    return a.arch_ == b.arch_ && a.k_ == b.k_ && a.h_ == b.h_ && a.theta_ == b.theta_;
  }

 private:
  Eigen::Index b_offset() const { return 4 * h_ * (k_ + h_); }
  Eigen::Index head_offset() const { return b_offset() + 4 * h_; }

  void check(const Eigen::MatrixXd& x) const {
    if (x.cols() != k_) {
      throw InputError("window has " + std::to_string(x.cols()) + " features, model expects " + std::to_string(k_));
    }
    if (x.rows() < 1) throw InputError("empty window");
    if (!x.allFinite()) throw InputError("window contains non-finite values");
  }

  void backward(const ForwardCache& cache, const Eigen::VectorXd& dlogits, Eigen::VectorXd& grad) const {
    Eigen::Map<Eigen::MatrixXd> gW(grad.data(), 4 * h_, k_ + h_);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + b_offset(), 4 * h_);
    Eigen::Map<Eigen::MatrixXd> ghW(grad.data() + head_offset(), kOutputs, h_);
    Eigen::Map<Eigen::VectorXd> ghb(grad.data() + head_offset() + kOutputs * h_, kOutputs);
    const auto L = cache.h.size();
    ghW.noalias() += dlogits * cache.h.back().transpose();
    ghb += dlogits;
    Eigen::VectorXd dh = head_W().transpose() * dlogits;
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(h_);
    Eigen::VectorXd dz(4 * h_);
    const auto Wm = W();
    for (std::size_t s = L; s-- > 0;) {
      const auto& i = cache.i[s].array();
      const auto& f = cache.f[s].array();
      const auto& g = cache.g[s].array();
      const auto& o = cache.o[s].array();
      const Eigen::ArrayXd tc = cache.c[s].array().tanh();
      const Eigen::ArrayXd c_prev = s > 0 ? Eigen::ArrayXd(cache.c[s - 1].array()) : Eigen::ArrayXd::Zero(h_).eval();
      const Eigen::ArrayXd d_o = dh.array() * tc;
      dc.array() += dh.array() * o * (1.0 - tc.square());
      dz.segment(0, h_) = (dc.array() * g * i * (1.0 - i)).matrix();
      dz.segment(h_, h_) = (dc.array() * c_prev * f * (1.0 - f)).matrix();
      dz.segment(2 * h_, h_) = (dc.array() * i * (1.0 - g.square())).matrix();
      dz.segment(3 * h_, h_) = (d_o * o * (1.0 - o)).matrix();
      gW.noalias() += dz * cache.input[s].transpose();
      gb += dz;
      dh.noalias() = Wm.rightCols(h_).transpose() * dz;
      dc.array() *= f;
    }
  }

  static Eigen::VectorXd sigmoid(const Eigen::VectorXd& v) { return (1.0 / (1.0 + (-v.array()).exp())).matrix(); }

  static Eigen::VectorXd softmax(const Eigen::VectorXd& v) {
    const Eigen::ArrayXd e = (v.array() - v.maxCoeff()).exp();
    return (e / e.sum()).matrix();
  }

  static double log_softmax_at(const Eigen::VectorXd& v, Eigen::Index j) {
    const double m = v.maxCoeff();
    return v(j) - m - std::log((v.array() - m).exp().sum());
  }

  static std::size_t argmax(const Eigen::VectorXd& v) {
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (v(i) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
    }
    return best;
  }

  Architecture arch_ = Architecture::Multihead;
  Eigen::Index k_ = 0;
  Eigen::Index h_ = 0;
  Eigen::VectorXd theta_;
};

}  // namespace mmw::lstm
