#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mmw/core/error.hpp"
#include "mmw/core/hash.hpp"

namespace mmw {

inline constexpr std::size_t kFeatureCount = 31;

/// Gauge features whose received-power/SNR readings carry the geometry signal.
inline constexpr std::array<std::string_view, 6> kEmpiricalFeatures = {
    "Rx Power",     "Rx Power Average",          "Rx Power OTA",
    "Rx Power Average OTA", "Rx Signal to Noise Ratio", "Rx Average SNR"};

/// Ten features reported as the top MRMR selection on the captured data, in reported order.
inline constexpr std::array<std::string_view, 10> kReferenceMrmrFeatures = {
    "Tx MCS",          "Best RXSS sector",         "Rx average AGC attenuation",
    "Ethernet Packets Sent", "Rx SNR over Gi64", "Local Device Rx sector",
    "Rx Power OTA",    "Rx Power Average",         "Rx Average SNR over Gi64",
    "TXSS periods SSW frame recv"};

inline constexpr std::string_view kPacketErrorRateFeature = "Average Packet Error Rate";

/// The 15 named features an ingested header must contain.
inline std::vector<std::string> required_feature_names() {
  std::vector<std::string> out;
  auto add = [&](std::string_view n) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.emplace_back(n);
  };
  for (auto n : kEmpiricalFeatures) add(n);
  for (auto n : kReferenceMrmrFeatures) add(n);
  add(kPacketErrorRateFeature);
  return out;
}

/// Lifetime counters: packet, frame and period counts.
inline bool default_counter_flag(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (std::string_view key : {"packets", "frame", "periods", "counter"}) {
    if (lower.find(key) != std::string::npos) return true;
  }
  return false;
}

class LinkStatsSchema {
 public:
  LinkStatsSchema() = default;

  /// Validates: exactly 31 unique names and matching flag count.
  LinkStatsSchema(std::vector<std::string> names, std::vector<bool> counter_flags, std::string version)
      : names_(std::move(names)), counter_flags_(std::move(counter_flags)), version_(std::move(version)) {
    if (names_.size() != kFeatureCount) {
      throw SchemaError("schema must have " + std::to_string(kFeatureCount) + " features, got " +
                        std::to_string(names_.size()));
    }
    if (counter_flags_.size() != names_.size()) {
      throw SchemaError("counter_flags length does not match feature count");
    }
    std::set<std::string> seen;
    for (const auto& n : names_) {
      if (n.empty()) throw SchemaError("empty feature name");
      if (!seen.insert(n).second) throw SchemaError("duplicate feature name '" + n + "'");
    }
  }

  /// Schema from a capture header: requires the named features, flags counters by name.
  static LinkStatsSchema from_header(const std::vector<std::string>& names) {
    for (const auto& req : required_feature_names()) {
      if (std::find(names.begin(), names.end(), req) == names.end()) {
        throw SchemaError("header is missing required feature '" + req + "'");
      }
    }
    std::vector<bool> flags;
    flags.reserve(names.size());
    Fnv1a h;
    for (const auto& n : names) {
      flags.push_back(default_counter_flag(n));
      h.update(n);
      h.update(std::string_view(","));
    }
    return LinkStatsSchema(names, std::move(flags), "header-" + h.hex());
  }

  /// Named features first (empirical, MRMR, PER) then neutral placeholders.
  static LinkStatsSchema default_schema() {
    std::vector<std::string> names = required_feature_names();
    for (int i = 0; names.size() < kFeatureCount - 2; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "aux_%02d", i);
      names.emplace_back(buf);
    }
    names.emplace_back("aux_counter_14");
    names.emplace_back("aux_counter_15");
    std::vector<bool> flags;
    for (const auto& n : names) flags.push_back(default_counter_flag(n));
    return LinkStatsSchema(std::move(names), std::move(flags), "default-v1");
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  const std::vector<bool>& counter_flags() const noexcept { return counter_flags_; }
  const std::string& version() const noexcept { return version_; }
  bool is_counter(std::size_t i) const { return counter_flags_.at(i); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

  std::size_t require_index(std::string_view name) const {
    if (auto i = index_of(name)) return *i;
    throw SchemaError("schema has no feature '" + std::string(name) + "'");
  }

  friend bool operator==(const LinkStatsSchema&, const LinkStatsSchema&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<bool> counter_flags_;
  std::string version_;
};

}  // namespace mmw
