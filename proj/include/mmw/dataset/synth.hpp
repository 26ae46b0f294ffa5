#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/dataset/dataset.hpp"

namespace mmw {

/// Parameters of the desk-scale synthetic capture generator.
struct SynthConfig {
  std::size_t rows_per_class = 250;
  double noise_sigma = 1.0;
  /// Mean shift per distance step, in units of each feature's scale.
  double separation = 6.0;
  /// Mean per-sample increment of the packet counter.
  double counter_rate = 100.0;

  void validate() const {
    if (rows_per_class < 2) throw ConfigError("rows_per_class must be >= 2");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("noise_sigma must be >= 0");
    if (!(separation >= 0.0) || !std::isfinite(separation)) throw ConfigError("separation must be >= 0");
    if (!(counter_rate >= 0.0) || !std::isfinite(counter_rate)) throw ConfigError("counter_rate must be >= 0");
  }

  nlohmann::json to_json() const {
    return {{"rows_per_class", rows_per_class},
            {"noise_sigma", noise_sigma},
            {"separation", separation},
            {"counter_rate", counter_rate}};
  }

  static SynthConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
    SynthConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      try {
        if (k == "rows_per_class") {
          if (!it->is_number_unsigned()) throw ConfigError("rows_per_class must be a nonnegative integer");
          c.rows_per_class = it->get<std::size_t>();
        } else if (k == "noise_sigma") {
          c.noise_sigma = it->get<double>();
        } else if (k == "separation") {
          c.separation = it->get<double>();
        } else if (k == "counter_rate") {
          c.counter_rate = it->get<double>();
        } else {
          throw ConfigError("unknown synth config key '" + k + "'");
        }
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("synth config key '" + k + "': " + e.what());
      }
    }
    c.validate();
    return c;
  }

  static SynthConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("synth config '" + path + "': " + e.what());
    }
  }
};

namespace synth_detail {

enum class AnglePattern { None, Shift, Sector };

/// Per-feature response model, aligned to LinkStatsSchema::default_schema().
struct FeatureModel {
  double base;
  double unit;            // feature scale; noise and shifts are multiples of it
  double distance_slope;  // per distance step, times separation
  double angle_gain;      // times the angle pattern value, times separation
  AnglePattern pattern;
  bool counter;
};

// 45 and 90 degrees move the power readings further than 180 does.
inline constexpr std::array<double, kAngleCount> kShiftPattern = {0.0, 1.0, 1.5, 0.5};
inline constexpr std::array<double, kAngleCount> kSectorPattern = {0.0, 1.0, 2.0, 3.0};

inline const std::array<FeatureModel, kFeatureCount>& feature_models() {
  using P = AnglePattern;
  static const std::array<FeatureModel, kFeatureCount> m = {{
      {-40.0, 1.0, -1.0, -0.25, P::Shift, false},   // Rx Power
      {-40.5, 1.0, -1.0, -0.25, P::Shift, false},   // Rx Power Average
      {-42.0, 1.0, -1.0, -0.25, P::Shift, false},   // Rx Power OTA
      {-42.5, 1.0, -1.0, -0.25, P::Shift, false},   // Rx Power Average OTA
      {25.0, 1.0, -0.8, -0.2, P::Shift, false},     // Rx Signal to Noise Ratio
      {25.5, 1.0, -0.8, -0.2, P::Shift, false},     // Rx Average SNR
      {12.0, 0.5, -0.5, 0.0, P::None, false},       // Tx MCS
      {16.0, 1.0, 0.0, 1.0, P::Sector, false},      // Best RXSS sector
      {5.0, 1.0, 0.7, 0.0, P::None, false},         // Rx average AGC attenuation
      {0.0, 1.0, 0.0, 0.0, P::None, true},          // Ethernet Packets Sent
      {24.0, 1.0, -0.8, -0.2, P::Shift, false},     // Rx SNR over Gi64
      {20.0, 1.0, 0.0, 0.8, P::Sector, false},      // Local Device Rx sector
      {24.5, 1.0, -0.8, -0.2, P::Shift, false},     // Rx Average SNR over Gi64
      {0.0, 1.0, 0.0, 0.0, P::None, true},          // TXSS periods SSW frame recv
      {0.01, 0.01, 0.2, 0.0, P::None, false},       // Average Packet Error Rate
      {0.0, 1.0, 0.3, 0.0, P::None, false},         // aux_00
      {0.0, 1.0, -0.3, 0.0, P::None, false},        // aux_01
      {0.0, 1.0, 0.0, 0.5, P::Shift, false},        // aux_02
      {0.0, 1.0, 0.0, 0.3, P::Sector, false},       // aux_03
      {0.0, 1.0, 0.0, 0.0, P::None, false},         // aux_04 .. aux_13: noise only
      {0.0, 1.0, 0.0, 0.0, P::None, false},
      {0.0, 1.0, 0.0, 0.0, P::None, false},
      {0.0, 1.0, 0.0, 0.0, P::None, false},
      {0.0, 1.0, 0.0, 0.0, P::None, false},
      {0.0, 1.0, 0.0, 0.0, P::None, false},
      {0.0, 1.0, 0.0, 0.0, P::None, false},
      {0.0, 1.0, 0.0, 0.0, P::None, false},
      {0.0, 1.0, 0.0, 0.0, P::None, false},
      {0.0, 1.0, 0.0, 0.0, P::None, false},
      {0.0, 1.0, 0.0, 0.0, P::None, true},          // aux_counter_14
      {0.0, 1.0, 0.0, 0.0, P::None, true},          // aux_counter_15
  }};
  return m;
}

inline double pattern_value(AnglePattern p, std::size_t angle) {
  switch (p) {
    case AnglePattern::Shift: return kShiftPattern[angle];
    case AnglePattern::Sector: return kSectorPattern[angle];
    case AnglePattern::None: return 0.0;
  }
  return 0.0;
}

/// Mean per-sample counter increment. distance_level is 0 for 10 ft, 1 per 10 ft.
inline double counter_rate(std::size_t feature, const SynthConfig& c, double distance_level, std::size_t angle) {
  switch (feature) {
    case 9: return c.counter_rate * std::max(0.2, 1.0 - 0.15 * distance_level);
    case 13: return c.counter_rate * 0.02 * static_cast<double>(angle + 1);
    default: return c.counter_rate * 0.5;
  }
}

inline LinkStatsRecord draw(const SynthConfig& c, double distance_level, std::size_t angle,
                            std::vector<double>& counter_state, std::mt19937_64& rng, double timestamp) {
  const auto& models = feature_models();
  std::normal_distribution<double> noise(0.0, 1.0);
  LinkStatsRecord rec;
  rec.timestamp = timestamp;
  rec.values.resize(kFeatureCount);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto& m = models[f];
    if (m.counter) {
      const double rate = counter_rate(f, c, distance_level, angle);
      double inc = 0.0;
      if (rate > 0.0) inc = static_cast<double>(std::poisson_distribution<long long>(rate)(rng));
      counter_state[f] += inc;
      rec.values[f] = counter_state[f];
    } else {
      const double shift = c.separation * (m.distance_slope * distance_level +
                                           m.angle_gain * pattern_value(m.pattern, angle));
      const double eps = c.noise_sigma > 0.0 ? c.noise_sigma * noise(rng) : 0.0;
      rec.values[f] = m.base + m.unit * (shift + eps);
    }
  }
  return rec;
}

}  // namespace synth_detail

/// Noise-free gauge mean of every feature for a (distance level, angle) cell.
/// Counter features report their mean per-sample increment.
inline std::vector<double> synth_class_mean(const SynthConfig& c, double distance_level, std::size_t angle) {
  const auto& models = synth_detail::feature_models();
  std::vector<double> mean(kFeatureCount);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto& m = models[f];
    if (m.counter) {
      mean[f] = synth_detail::counter_rate(f, c, distance_level, angle);
    } else {
      mean[f] = m.base + m.unit * c.separation *
                             (m.distance_slope * distance_level +
                              m.angle_gain * synth_detail::pattern_value(m.pattern, angle));
    }
  }
  return mean;
}

/// One capture per joint class (capture id = joint index), classes in joint order.
/// Counter features are raw lifetime counters starting from zero.
inline LabeledDataset synth_generate(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  LabeledDataset ds{LinkStatsSchema::default_schema(), {}, {}, {}};
  ds.records.reserve(config.rows_per_class * kJointCount);
  double t = 0.0;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const ClassLabel label = ClassLabel::from_joint(j);
    std::vector<double> counters(kFeatureCount, 0.0);
    for (std::size_t r = 0; r < config.rows_per_class; ++r) {
      ds.push_back(synth_detail::draw(config, static_cast<double>(label.distance_index()), label.angle_index(),
                                      counters, rng, t),
                   label, j);
      t += 1.0;
    }
  }
  return ds;
}

/// Captures at arbitrary distances (e.g. 25 and 35 ft) for all four angles.
/// Distances between trained classes interpolate the class means linearly.
inline HeldoutDataset synth_generate_heldout(const SynthConfig& config, const std::vector<double>& distances_ft,
                                             std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  HeldoutDataset ds{LinkStatsSchema::default_schema(), {}, {}, {}, {}};
  double t = 0.0;
  CaptureId cap = 0;
  for (double ft : distances_ft) {
    const double level = (ft - 10.0) / 10.0;
    for (std::size_t a = 0; a < kAngleCount; ++a, ++cap) {
      std::vector<double> counters(kFeatureCount, 0.0);
      for (std::size_t r = 0; r < config.rows_per_class; ++r) {
        ds.records.push_back(synth_detail::draw(config, level, a, counters, rng, t));
        ds.distance_ft.push_back(ft);
        ds.angle_deg.push_back(kAngleDegrees[a]);
        ds.capture_ids.push_back(cap);
        t += 1.0;
      }
    }
  }
  return ds;
}

}  // namespace mmw
