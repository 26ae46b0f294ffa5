#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mmw/dataset.hpp"
#include "mmw/features.hpp"
#include "mmw/kitsune.hpp"

using namespace mmw;
using namespace mmw::kitsune;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, double mean, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(mean, 1.0);
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) x(r, c) = n(rng);
  return x;
}

AutoencoderConfig constant_rate(double lr) {
  AutoencoderConfig c;
  c.learning_rate = lr;
  c.decay = false;
  return c;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

TEST(Autoencoder, HiddenSize) {
  EXPECT_EQ(hidden_size(1, 0.75), 1);
  EXPECT_EQ(hidden_size(4, 0.75), 3);
  EXPECT_EQ(hidden_size(10, 0.75), 8);
  EXPECT_EQ(hidden_size(3, 0.01), 1);
}

TEST(Autoencoder, InitWithinBound) {
  std::mt19937_64 rng(3);
  Autoencoder ae(16, AutoencoderConfig{}, rng);
  EXPECT_EQ(ae.hidden(), 12);
  EXPECT_LE(ae.weights().cwiseAbs().maxCoeff(), 0.25);
  EXPECT_GT(ae.weights().cwiseAbs().maxCoeff(), 0.0);
}

// Independent scalar re-derivation of one update step.
TEST(Autoencoder, OneStepMatchesHandDerivation) {
  for (auto loss : {ReconstructionLoss::CrossEntropy, ReconstructionLoss::SquaredError}) {
    auto cfg = constant_rate(0.3);
    cfg.loss = loss;
    std::mt19937_64 rng(11);
    Autoencoder ae(3, cfg, rng);
    ae.train(Eigen::Vector3d(0.0, 0.0, 0.0));
    ae.train(Eigen::Vector3d(2.0, 4.0, 1.0));
    const Autoencoder before = ae;
    const Eigen::Vector3d x(1.0, 1.0, 0.5);
    const Eigen::Vector3d in(0.5, 0.25, 0.5);

    const auto& W = before.weights();
    const int n = 3, h = static_cast<int>(before.hidden());
    std::vector<double> y(h), z(n), d2(n), d1(h);
    for (int j = 0; j < h; ++j) {
      double a = before.hidden_bias()(j);
      for (int i = 0; i < n; ++i) a += W(i, j) * in(i);
      y[j] = sigmoid(a);
    }
    double sq = 0;
    for (int i = 0; i < n; ++i) {
      double a = before.visible_bias()(i);
      for (int j = 0; j < h; ++j) a += W(i, j) * y[j];
      z[i] = sigmoid(a);
      d2[i] = in(i) - z[i];
      sq += d2[i] * d2[i];
      if (loss == ReconstructionLoss::SquaredError) d2[i] *= z[i] * (1 - z[i]);
    }
    for (int j = 0; j < h; ++j) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += W(i, j) * d2[i];
      d1[j] = s * y[j] * (1 - y[j]);
    }
    const double rmse = ae.train(x);
    EXPECT_NEAR(rmse, std::sqrt(sq / n), 1e-14);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(ae.visible_bias()(i), before.visible_bias()(i) + 0.3 * d2[i], 1e-14);
      for (int j = 0; j < h; ++j) {
        EXPECT_NEAR(ae.weights()(i, j), W(i, j) + 0.3 * (in(i) * d1[j] + d2[i] * y[j]), 1e-14);
      }
    }
    for (int j = 0; j < h; ++j) EXPECT_NEAR(ae.hidden_bias()(j), before.hidden_bias()(j) + 0.3 * d1[j], 1e-14);
  }
}

TEST(Autoencoder, DecayScalesStep) {
  AutoencoderConfig decayed;
  decayed.learning_rate = 0.4;
  std::mt19937_64 r1(5), r2(5);
  Autoencoder a(2, decayed, r1), b(2, constant_rate(0.2), r2);
  for (const auto& x : {Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 0), Eigen::Vector2d(0.5, 0.5)}) {
    a.train(x);
    b.train(x);
  }
  // Third update of `a` uses 0.4 / sqrt(3); `b` uses 0.2 throughout, so they must diverge.
  EXPECT_NE(a.weights(), b.weights());
  std::mt19937_64 r3(5), r4(5);
  Autoencoder c(2, decayed, r3), d(2, constant_rate(0.4), r4);
  c.train(Eigen::Vector2d(0, 1));
  d.train(Eigen::Vector2d(0, 1));
  EXPECT_EQ(c.weights(), d.weights());  // t = 1: no decay yet
}

TEST(Autoencoder, ScalingClampsToUnitInterval) {
  std::mt19937_64 rng(1);
  Autoencoder ae(2, AutoencoderConfig{}, rng);
  EXPECT_EQ(ae.scale(Eigen::Vector2d(5, -5)), Eigen::Vector2d(0, 0));
  ae.train(Eigen::Vector2d(0, 10));
  ae.train(Eigen::Vector2d(2, 20));
  EXPECT_EQ(ae.scale(Eigen::Vector2d(1, 15)), Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(ae.scale(Eigen::Vector2d(-3, 99)), Eigen::Vector2d(0, 1));
  std::mt19937_64 r(2);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 200; ++i) {
    const auto s = ae.scale(Eigen::Vector2d(u(r), u(r)));
    EXPECT_TRUE((s.array() >= 0).all() && (s.array() <= 1).all());
  }
}

TEST(Autoencoder, JsonRoundTrip) {
  std::mt19937_64 rng(9);
  Autoencoder ae(5, AutoencoderConfig{}, rng);
  ae.train(Eigen::VectorXd::LinSpaced(5, 0, 1));
  EXPECT_EQ(Autoencoder::from_json(ae.to_json()), ae);
}

TEST(FeatureMap, SizeOneGivesSingletons) {
  const auto x = gaussian(50, 6, 0, 1);
  const auto map = feature_map_fit(x, 1);
  ASSERT_EQ(map.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(map[i], std::vector<std::size_t>{i});
}

TEST(FeatureMap, IdenticalFeaturesFormOneCluster) {
  Eigen::MatrixXd x(20, 4);
  for (int r = 0; r < 20; ++r) x.row(r).setConstant(std::sin(r));
  EXPECT_EQ(feature_map_fit(x, 4), (FeatureMap{{0, 1, 2, 3}}));
}

TEST(FeatureMap, SingleFeature) {
  EXPECT_EQ(feature_map_fit(gaussian(10, 1, 0, 2), 10), (FeatureMap{{0}}));
}

TEST(FeatureMap, IndependentBlocksNeverMix) {
  // Features 0,2,5 share one latent, 1,3 another, 4 is independent noise.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  Eigen::MatrixXd x(300, 6);
  for (int r = 0; r < 300; ++r) {
    const double a = n(rng), b = n(rng);
    x(r, 0) = a + 0.05 * n(rng);
    x(r, 2) = -a + 0.05 * n(rng);
    x(r, 5) = 2 * a + 0.05 * n(rng);
    x(r, 1) = b + 0.05 * n(rng);
    x(r, 3) = b + 0.05 * n(rng);
    x(r, 4) = n(rng);
  }
  EXPECT_EQ(feature_map_fit(x, 3), (FeatureMap{{0, 2, 5}, {1, 3}, {4}}));
  const auto two = feature_map_fit(x, 2);
  ASSERT_TRUE(is_partition(two, 6));
  for (const auto& c : two) {
    const bool in_a = c.front() == 0 || c.front() == 2 || c.front() == 5;
    for (auto i : c) EXPECT_EQ(in_a, i == 0 || i == 2 || i == 5);
  }
}

TEST(FeatureMap, ConstantFeatureIsUncorrelated) {
  Eigen::MatrixXd x = gaussian(40, 3, 0, 8);
  x.col(1).setConstant(2.0);
  const auto d = correlation_distance(x);
  EXPECT_EQ(d(0, 1), 1.0);
  EXPECT_EQ(d(1, 2), 1.0);
}

TEST(FeatureMap, PartitionProperty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = gaussian(30, 1 + static_cast<Eigen::Index>(seed % 13), 0, seed);
    for (std::size_t m : {1, 2, 3, 5, 40}) {
      const auto map = feature_map_fit(x, m);
      EXPECT_TRUE(is_partition(map, static_cast<std::size_t>(x.cols())));
      for (const auto& c : map) {
        EXPECT_LE(c.size(), m);
        EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
      }
      for (std::size_t i = 1; i < map.size(); ++i) EXPECT_LT(map[i - 1].front(), map[i].front());
    }
  }
}

TEST(FeatureMap, Errors) {
  EXPECT_THROW(feature_map_fit(gaussian(1, 3, 0, 1), 2), ConfigError);
  EXPECT_THROW(feature_map_fit(gaussian(5, 3, 0, 1), 0), ConfigError);
}

TEST(KitsuneModel, ConstantVectorReconstructs) {
  std::vector<std::vector<std::size_t>> singletons;
  for (std::size_t i = 0; i < kFeatureCount; ++i) singletons.push_back({i});
  KitsuneModel model(kFeatureCount, singletons, constant_rate(0.1), 42);
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(kFeatureCount, -3, 12);
  for (int t = 0; t < 2000; ++t) model.train(x);
  EXPECT_LE(model.execute(x), 1e-3);
}

TEST(KitsuneModel, ZeroRateLeavesWeightsUnchanged) {
  const auto x = gaussian(60, 5, 0, 3);
  KitsuneConfig cfg;
  cfg.max_cluster = 2;
  cfg.autoencoder.learning_rate = 0.0;
  auto model = KitsuneModel::from_prefix(x, cfg, 7);
  const auto before = model;
  for (Eigen::Index r = 0; r < x.rows(); ++r) model.train(x.row(r).transpose());
  for (std::size_t c = 0; c < model.ensemble_layer().size(); ++c) {
    EXPECT_EQ(model.ensemble_layer()[c].weights(), before.ensemble_layer()[c].weights());
    EXPECT_EQ(model.ensemble_layer()[c].hidden_bias(), before.ensemble_layer()[c].hidden_bias());
    EXPECT_EQ(model.ensemble_layer()[c].visible_bias(), before.ensemble_layer()[c].visible_bias());
  }
  EXPECT_EQ(model.output_layer().weights(), before.output_layer().weights());
  EXPECT_EQ(model.samples_trained(), 60u);
}

TEST(KitsuneModel, ExecuteIsPure) {
  const auto x = gaussian(100, 6, 0, 5);
  auto model = KitsuneModel::from_prefix(x.topRows(30), KitsuneConfig{}, 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) model.train(x.row(r).transpose());
  const auto copy = model;
  const Eigen::VectorXd probe = x.row(3).transpose();
  const double a = model.execute(probe);
  EXPECT_EQ(a, model.execute(probe));
  EXPECT_EQ(model, copy);
}

TEST(KitsuneModel, UntrainedScoreIsFinite) {
  auto model = KitsuneModel::from_prefix(gaussian(10, 4, 0, 1), KitsuneConfig{}, 1);
  const double s = model.execute(Eigen::VectorXd::Ones(4));
  EXPECT_TRUE(std::isfinite(s));
  EXPECT_GE(s, 0.0);
}

TEST(KitsuneModel, BadInputLeavesStateUntouched) {
  auto model = KitsuneModel::from_prefix(gaussian(10, 4, 0, 1), KitsuneConfig{}, 1);
  model.train(Eigen::VectorXd::Ones(4));
  const auto copy = model;
  Eigen::VectorXd bad = Eigen::VectorXd::Ones(4);
  bad(2) = std::nan("");
  EXPECT_THROW(model.train(bad), InputError);
  EXPECT_THROW(model.train(Eigen::VectorXd::Ones(5)), InputError);
  EXPECT_THROW(model.execute(Eigen::VectorXd::Ones(3)), InputError);
  EXPECT_EQ(model, copy);
}

TEST(KitsuneModel, ShiftedInputScoresHigher) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = gaussian(1000, 8, 0, seed);
    auto model = KitsuneModel::from_prefix(x.topRows(200), KitsuneConfig{}, seed);
    for (Eigen::Index r = 0; r < x.rows(); ++r) model.train(x.row(r).transpose());
    const Eigen::VectorXd centre = Eigen::VectorXd::Zero(8);
    EXPECT_GT(model.execute(centre.array() + 10.0), model.execute(centre));
  }
}

TEST(KitsuneModel, JsonRoundTrip) {
  const auto x = gaussian(50, 7, 0, 2);
  KitsuneConfig cfg;
  cfg.max_cluster = 3;
  auto model = KitsuneModel::from_prefix(x, cfg, 4);
  for (Eigen::Index r = 0; r < x.rows(); ++r) model.train(x.row(r).transpose());
  const auto back = KitsuneModel::from_json(nlohmann::json::parse(model.to_json().dump()));
  EXPECT_EQ(back, model);
  EXPECT_EQ(back.execute(x.row(0).transpose()), model.execute(x.row(0).transpose()));
}

TEST(Ensemble, ArgminTiesGoLowAndIgnoreOffsets) {
  EXPECT_EQ(argmin_index({0.3, 0.1, 0.1, 0.2}), 1u);
  EXPECT_EQ(argmin_index({0.5, 0.5}), 0u);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> s(5);
    for (auto& v : s) v = std::round(u(rng) * 4) / 4;
    auto shifted = s;
    for (auto& v : shifted) v += 0.75;
    EXPECT_EQ(argmin_index(s), argmin_index(shifted));
  }
}

TEST(Ensemble, IdenticalModelsTieToFirstClass) {
  const auto x = gaussian(40, 3, 0, 1);
  KitsuneConfig cfg;
  cfg.fm_prefix = 10;
  const auto m = train_class_model(x, cfg, 5);
  KitsuneEnsemble e{Target::Distance, cfg, {1, 3}, {m, m}};
  EXPECT_EQ(e.classify(x.row(0).transpose()).label, 1u);
}

TEST(Ensemble, SingletonAlwaysItsClass) {
  const auto x = gaussian(30, 4, 0, 1);
  KitsuneConfig cfg;
  cfg.fm_prefix = 10;
  const auto e = ensemble_train(x, std::vector<std::size_t>(30, 2), Target::Angle, cfg, 1);
  ASSERT_EQ(e.models.size(), 1u);
  for (auto p : e.predict(gaussian(20, 4, 5, 2))) EXPECT_EQ(p, 2u);
}

TEST(Ensemble, TwoSeparatedGaussians) {
  const Eigen::Index n = 600;
  Eigen::MatrixXd x(2 * n, 6);
  x << gaussian(n, 6, 0, 1), gaussian(n, 6, 6, 2);
  std::vector<std::size_t> y(2 * n, 0);
  std::fill(y.begin() + n, y.end(), 1);
  const auto e = ensemble_train(x, y, Target::Distance, KitsuneConfig{}, 3);
  EXPECT_EQ(e.samples_trained(), static_cast<std::uint64_t>(2 * n));
  Eigen::MatrixXd t(400, 6);
  t << gaussian(200, 6, 0, 10), gaussian(200, 6, 6, 11);
  const auto p = e.predict(t);
  int ok = 0;
  for (std::size_t i = 0; i < p.size(); ++i) ok += p[i] == (i < 200 ? 0u : 1u);
  EXPECT_GE(ok, 396);
}

TEST(Ensemble, ZeroRateKeepsDecisionsOnSeenRange) {
  const Eigen::Index n = 300;
  Eigen::MatrixXd x(2 * n, 4);
  x << gaussian(n, 4, 0, 1), gaussian(n, 4, 3, 2);
  std::vector<std::size_t> y(2 * n, 0);
  std::fill(y.begin() + n, y.end(), 1);
  KitsuneConfig cfg;
  cfg.autoencoder.learning_rate = 0.0;
  auto e = ensemble_train(x, y, Target::Distance, cfg, 3);
  const auto before = e.predict(x);
  // Replaying rows already seen leaves the running ranges, and so every score, unchanged.
  for (std::size_t c = 0; c < 2; ++c)
    for (Eigen::Index r = 0; r < n; ++r) e.models[c].train(x.row(static_cast<Eigen::Index>(c) * n + r).transpose());
  EXPECT_EQ(e.predict(x), before);
}

TEST(Ensemble, JobsDoNotChangeResult) {
  const auto x = gaussian(400, 5, 0, 1);
  std::vector<std::size_t> y(400);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 4;
  KitsuneConfig cfg;
  cfg.fm_prefix = 50;
  const auto a = ensemble_train(x, y, Target::Angle, cfg, 9, 1);
  const auto b = ensemble_train(x, y, Target::Angle, cfg, 9, 3);
  EXPECT_EQ(a.models, b.models);
  EXPECT_EQ(a.classes, (std::vector<std::size_t>{0, 1, 2, 3}));
  const auto back = KitsuneEnsemble::from_json(nlohmann::json::parse(a.to_json().dump()));
  EXPECT_EQ(back.models, a.models);
  EXPECT_EQ(back.predict(x), a.predict(x));
}

TEST(Ensemble, ClassBelowPrefixFails) {
  const auto x = gaussian(30, 3, 0, 1);
  std::vector<std::size_t> y(30, 0);
  y[29] = 1;
  KitsuneConfig cfg;
  cfg.fm_prefix = 5;
  EXPECT_THROW(ensemble_train(x, y, Target::Distance, cfg, 1), FitError);
  EXPECT_THROW((KitsuneEnsemble{}.classify(Eigen::VectorXd::Zero(3))), ConfigError);
}

TEST(Regression, ExactLine) {
  const auto r = fit_distance_regression({{10, 1.0}, {20, 2.0}, {30, 3.0}});
  EXPECT_NEAR(r.slope, 10.0, 1e-12);
  EXPECT_NEAR(r.intercept, 0.0, 1e-12);
  EXPECT_NEAR(r.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(r.predict_feet(2.5), 25.0, 1e-12);
}

TEST(Regression, Degenerate) {
  EXPECT_THROW(fit_distance_regression({{10, 1.0}, {20, 1.0}, {30, 1.0}}), FitError);
  EXPECT_THROW(fit_distance_regression({{10, 1.0}, {10, 2.0}}), FitError);
  EXPECT_THROW(fit_distance_regression({}), FitError);
}

TEST(Regression, SynthMonotoneInDistance) {
  SynthConfig sc;
  sc.separation = 1.0;
  const auto ds = normalize_counters(synth_generate(sc, 1));
  const auto sp = split(ds, 0.3, 1);
  const auto pipe = empirical_select(sp.train);
  const auto tr = pipe.apply(sp.train), te = pipe.apply(sp.test);
  std::vector<Eigen::Index> d10;
  for (std::size_t i = 0; i < tr.labels.size(); ++i)
    if (tr.labels[i].distance == Distance::D10) d10.push_back(static_cast<Eigen::Index>(i));
  KitsuneConfig cfg;
  cfg.autoencoder.decay = false;
  const auto model = train_class_model(tr.values(d10, Eigen::all), cfg, 1);
  const auto pts = mean_rmse_by_distance(model, te.values, te.labels);
  ASSERT_EQ(pts.size(), 5u);
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_GT(pts[i].mean_rmse, pts[i - 1].mean_rmse);
  EXPECT_GE(fit_distance_regression(pts).r_squared, 0.9);
}
