#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmw/core/error.hpp"
#include "mmw/core/json_eigen.hpp"
#include "mmw/core/log.hpp"
#include "mmw/eval/confusion.hpp"
#include "mmw/features/pipeline.hpp"

namespace mmw::eval {

enum class ModelFamily { Kitsune, Multiclass, Multihead };

inline constexpr std::array<ModelFamily, 3> kModelFamilies = {ModelFamily::Kitsune, ModelFamily::Multiclass,
                                                              ModelFamily::Multihead};
inline constexpr std::array<PipelineKind, 3> kPipelineKinds = {PipelineKind::Empirical, PipelineKind::Mrmr,
                                                               PipelineKind::Pca};

inline std::string to_string(ModelFamily m) {
  switch (m) {
    case ModelFamily::Kitsune: return "Kitsune";
    case ModelFamily::Multiclass: return "Multiclass";
    case ModelFamily::Multihead: return "Multihead";
  }
  return "?";
}

inline ModelFamily model_family_from_string(const std::string& s) {
  for (auto m : kModelFamilies) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown model family '" + s + "'");
}

inline std::string pipeline_label(PipelineKind k) {
  switch (k) {
    case PipelineKind::Empirical: return "Empirical";
    case PipelineKind::Mrmr: return "MRMR";
    case PipelineKind::Pca: return "PCA";
  }
  return "?";
}

/// Accuracy unit: Kitsune scores individual samples, the LSTM models score windows.
inline std::string accuracy_unit(ModelFamily m) { return m == ModelFamily::Kitsune ? "sample" : "window"; }

struct ReferenceAccuracy {
  double distance;  // percent
  double angle;
};

/// Published accuracies (percent) for the real dataset, for side-by-side display only.
inline ReferenceAccuracy reference_accuracy(ModelFamily m, PipelineKind k) {
  static constexpr ReferenceAccuracy table[3][3] = {
      {{31.5, 49.2}, {43.0, 56.9}, {33.5, 59.0}},
      {{70.9, 88.0}, {97.8, 99.0}, {80.9, 87.1}},
      {{93.0, 98.6}, {88.5, 92.4}, {98.7, 98.9}},
  };
  return table[static_cast<int>(m)][static_cast<int>(k)];
}

struct StratumMatrix {
  std::size_t distance = 0;  // distance class index
  ConfusionMatrix matrix;
};

/// Angle confusion within each distance class of the truth labels. Classes of a
/// stratum are the angles occurring in it (truth or prediction); empty strata are
/// omitted with a warning.
inline std::vector<StratumMatrix> per_distance_angle_eval(const std::vector<ClassLabel>& truth,
                                                          const std::vector<std::size_t>& predicted_angle) {
  if (truth.size() != predicted_angle.size()) throw ConfigError("predictions and truth differ in length");
  std::vector<StratumMatrix> out;
  for (std::size_t d = 0; d < kDistanceCount; ++d) {
    std::vector<std::size_t> t, p;
    std::array<bool, kAngleCount> seen{};
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i].distance_index() != d) continue;
      if (predicted_angle[i] >= kAngleCount) throw LabelError("predicted angle class out of range");
      t.push_back(truth[i].angle_index());
      p.push_back(predicted_angle[i]);
      seen[t.back()] = seen[p.back()] = true;
    }
    if (t.empty()) {
      log::warn("no test rows at " + distance_name(d) + "; angle matrix omitted");
      continue;
    }
    std::vector<std::size_t> ids;
    std::vector<std::string> names;
    for (std::size_t a = 0; a < kAngleCount; ++a) {
      if (seen[a]) {
        ids.push_back(a);
        names.push_back(angle_name(a));
      }
    }
    out.push_back({d, confusion(p, t, empty_confusion(std::move(ids), std::move(names)))});
  }
  return out;
}

/// Scores of one (model family, feature pipeline) cell. Either matrix may be absent
/// when the evaluated models do not predict that quantity.
struct EvalResult {
  ModelFamily model = ModelFamily::Kitsune;
  PipelineKind features = PipelineKind::Empirical;
  std::optional<ConfusionMatrix> distance;
  std::optional<ConfusionMatrix> angle;
  std::vector<StratumMatrix> per_distance_angle;
  nlohmann::json metadata = nlohmann::json::object();

  std::string key() const { return to_string(model) + "/" + pipeline_label(features); }

  nlohmann::json to_json() const {
    nlohmann::json strata = nlohmann::json::array();
    for (const auto& s : per_distance_angle) strata.push_back({{"distance", distance_name(s.distance)}, {"matrix", s.matrix.to_json()}});
    return {{"model", to_string(model)},
            {"features", to_string(features)},
            {"unit", accuracy_unit(model)},
            {"distance", distance ? distance->to_json() : nlohmann::json()},
            {"angle", angle ? angle->to_json() : nlohmann::json()},
            {"per_distance_angle", std::move(strata)},
            {"metadata", metadata}};
  }

  static EvalResult from_json(const nlohmann::json& j) {
    EvalResult r;
    r.model = model_family_from_string(j.at("model").get<std::string>());
    r.features = pipeline_kind_from_string(j.at("features").get<std::string>());
    if (!j.at("distance").is_null()) r.distance = ConfusionMatrix::from_json(j.at("distance"));
    if (!j.at("angle").is_null()) r.angle = ConfusionMatrix::from_json(j.at("angle"));
    for (const auto& s : j.at("per_distance_angle")) {
      const auto name = s.at("distance").get<std::string>();
      std::size_t d = kDistanceCount;
      for (std::size_t i = 0; i < kDistanceCount; ++i) {
        if (distance_name(i) == name) d = i;
      }
      if (d == kDistanceCount) throw ConfigError("unknown distance stratum '" + name + "'");
      r.per_distance_angle.push_back({d, ConfusionMatrix::from_json(s.at("matrix"))});
    }
    r.metadata = j.at("metadata");
    return r;
  }
};

/// Folds `part` into the result list, combining parts that score the same cell.
inline void merge_result(std::vector<EvalResult>& results, EvalResult part) {
  for (auto& r : results) {
    if (r.model != part.model || r.features != part.features) continue;
    if ((r.distance && part.distance) || (r.angle && part.angle) ||
        (!r.per_distance_angle.empty() && !part.per_distance_angle.empty())) {
      throw ConfigError("two evaluations score the same quantity for " + r.key());
    }
    if (part.distance) r.distance = std::move(part.distance);
    if (part.angle) r.angle = std::move(part.angle);
    if (!part.per_distance_angle.empty()) r.per_distance_angle = std::move(part.per_distance_angle);
    for (auto it = part.metadata.begin(); it != part.metadata.end(); ++it) r.metadata[it.key()] = it.value();
    return;
  }
  results.push_back(std::move(part));
}

inline std::string percent(double fraction) {
  if (std::isnan(fraction)) return "—";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
  return buf;
}

inline std::string percent_value(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", pct);
  return buf;
}

struct Table {
  std::string markdown;
  std::string csv;
};

inline constexpr const char* kTableCsvHeader =
    "model,features,distance_acc_pct,angle_acc_pct,distance_correct,distance_total,angle_correct,angle_total,unit,"
    "reference_distance_pct,reference_angle_pct";

/// The nine (model, features) rows in the published layout; absent cells print as an em dash.
inline Table table_report(const std::vector<EvalResult>& results, bool reference_column = true,
                          const nlohmann::json& context = nlohmann::json::object()) {
  const std::string missing = "—";
  std::ostringstream md, csv;
  md << "# Classification accuracy\n\n";
  md << "Accuracy unit: sample-level for Kitsune, window-level for Multiclass and Multihead.\n";
  if (context.contains("split")) md << "Split: " << context.at("split").get<std::string>() << "\n";
  if (context.contains("test_hash")) md << "Test data: " << context.at("test_hash").get<std::string>() << "\n";
  md << "\n| Model | Features | Distance acc. (%) | Angle acc. (%) | Unit |";
  if (reference_column) md << " Reference distance (%) | Reference angle (%) |";
  md << "\n|---|---|---|---|---|";
  if (reference_column) md << "---|---|";
  md << "\n";
  csv << kTableCsvHeader << "\n";
  for (auto m : kModelFamilies) {
    for (auto k : kPipelineKinds) {
      const EvalResult* r = nullptr;
      for (const auto& x : results) {
        if (x.model == m && x.features == k) r = &x;
      }
      const auto cell = [&](const std::optional<ConfusionMatrix>& cm) {
        return r && cm ? percent(cm->accuracy()) : missing;
      };
      const auto count = [&](const std::optional<ConfusionMatrix>& cm, bool correct) {
        if (!r || !cm) return missing;
        return std::to_string(correct ? cm->correct() : cm->total());
      };
      const std::string d = r ? cell(r->distance) : missing, a = r ? cell(r->angle) : missing;
      const auto reference = reference_accuracy(m, k);
      md << "| " << to_string(m) << " | " << pipeline_label(k) << " | " << d << " | " << a << " | "
         << accuracy_unit(m) << " |";
      if (reference_column) md << ' ' << percent_value(reference.distance) << " | " << percent_value(reference.angle) << " |";
      md << "\n";
      csv << to_string(m) << ',' << pipeline_label(k) << ',' << d << ',' << a << ','
          << (r ? count(r->distance, true) : missing) << ',' << (r ? count(r->distance, false) : missing) << ','
          << (r ? count(r->angle, true) : missing) << ',' << (r ? count(r->angle, false) : missing) << ','
          << accuracy_unit(m) << ',' << (reference_column ? percent_value(reference.distance) : missing) << ','
          << (reference_column ? percent_value(reference.angle) : missing) << "\n";
    }
  }
  return {md.str(), csv.str()};
}

struct EvalReport {
  std::vector<EvalResult> results;
  nlohmann::json context = nlohmann::json::object();  // split, hashes, seed

  nlohmann::json to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : results) rs.push_back(r.to_json());
    return {{"format", "mmw.eval_report"}, {"version", 1}, {"context", context}, {"results", std::move(rs)}};
  }
  static EvalReport from_json(const nlohmann::json& j) {
    json_io::expect_format(j, "mmw.eval_report", 1);
    EvalReport r;
    r.context = j.at("context");
    for (const auto& x : j.at("results")) merge_result(r.results, EvalResult::from_json(x));
    return r;
  }
};

inline std::string matrix_file_stem(const EvalResult& r) {
  std::string m = to_string(r.model);
  for (auto& c : m) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return m + "_" + to_string(r.features);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

/// report.md, report.csv, report.json and one CSV per confusion matrix under `dir`.
/// Returns the paths written, in order.
inline std::vector<std::filesystem::path> write_report(const EvalReport& report, const std::filesystem::path& dir,
                                                       bool reference_column = true) {
  std::filesystem::create_directories(dir / "matrices");
  std::vector<std::filesystem::path> written;
  const auto table = table_report(report.results, reference_column, report.context);
  std::string md = table.markdown;
  for (const auto& r : report.results) {
    if (r.per_distance_angle.empty()) continue;
    md += "\n## " + r.key() + " angle accuracy per distance\n\n| Distance | Angle acc. (%) | Rows |\n|---|---|---|\n";
    for (const auto& s : r.per_distance_angle) {
      md += "| " + distance_name(s.distance) + " | " + percent(s.matrix.accuracy()) + " | " +
            std::to_string(s.matrix.total()) + " |\n";
    }
  }
  write_text(dir / "report.md", md);
  written.push_back(dir / "report.md");
  write_text(dir / "report.csv", table.csv);
  written.push_back(dir / "report.csv");
  json_io::save(report.to_json(), (dir / "report.json").string());
  written.push_back(dir / "report.json");
  auto emit = [&](const ConfusionMatrix& m, const std::string& name) {
    std::ostringstream s;
    m.write_csv(s);
    write_text(dir / "matrices" / name, s.str());
    written.push_back(dir / "matrices" / name);
  };
  for (const auto& r : report.results) {
    const auto stem = matrix_file_stem(r);
    if (r.distance) emit(*r.distance, stem + "_distance.csv");
    if (r.angle) emit(*r.angle, stem + "_angle.csv");
    for (const auto& s : r.per_distance_angle) emit(s.matrix, stem + "_angle_at_" + distance_name(s.distance) + ".csv");
  }
  return written;
}

}  // namespace mmw::eval
