#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/core/hash.hpp"
#include "mmw/core/json_eigen.hpp"
#include "mmw/core/log.hpp"
#include "mmw/dataset.hpp"

namespace mmwgeo {

inline constexpr const char* kToolVersion = "0.1.0";

using nlohmann::json;

/// Expands `--config file.json` into flags placed right after the subcommand
/// words, so flags given on the command line (later) take precedence.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw mmw::ConfigError("--config needs a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  const json cfg = mmw::json_io::load(path);
  if (!cfg.is_object()) throw mmw::ConfigError("config file must hold a JSON object");
  std::vector<std::string> flags;
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const std::string flag = "--" + it.key();
    auto scalar = [&](const json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number() || v.is_boolean()) return v.dump();
      throw mmw::ConfigError("config key '" + it.key() + "' has an unsupported value");
    };
    if (it->is_boolean()) {
      if (it->get<bool>()) flags.push_back(flag);
    } else if (it->is_array()) {
      for (const auto& v : *it) {
        flags.push_back(flag);
        flags.push_back(scalar(v));
      }
    } else {
      flags.push_back(flag);
      flags.push_back(scalar(*it));
    }
  }
  // args[0] is the program; subcommand words follow until the first flag.
  std::size_t pos = 1;
  while (pos < args.size() && !args[pos].empty() && args[pos][0] != '-' && pos < 3) ++pos;
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos), flags.begin(), flags.end());
  return args;
}

inline json input_entry(const std::string& path) {
  return {{"file", std::filesystem::path(path).filename().string()}, {"fnv1a", mmw::hash_file(path)}};
}

/// Output paths are deliberately left out so reruns into another directory stay byte-identical.
inline json provenance(const std::string& command, const json& config, const json& inputs) {
  return {{"tool", "mmwgeo"}, {"version", kToolVersion}, {"command", command}, {"config", config}, {"inputs", inputs}};
}

inline void write_meta(const std::string& csv_path, const json& meta) {
  mmw::json_io::save(meta, csv_path + ".meta.json");
}

inline json read_meta(const std::string& csv_path) {
  const auto p = csv_path + ".meta.json";
  if (!std::filesystem::exists(p)) return json();
  return mmw::json_io::load(p);
}

inline std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  if (p.extension() == ".json" || p.extension() == ".csv") p.replace_extension();
  return p.string() + suffix;
}

/// Ingested datasets: counters already differenced, schema taken from the header.
inline mmw::LabeledDataset load_ingested(const std::string& path) {
  const auto meta = read_meta(path);
  if (!meta.is_object() || meta.value("counters", "") != "normalized") {
    mmw::log::warn("'" + path + "' has no ingest metadata; assuming counters are already normalized");
  }
  return mmw::parse_csv(path, mmw::read_csv_schema(path));
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw mmw::IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw mmw::IoError("write to '" + path + "' failed");
}

}  // namespace mmwgeo
