// mmwgeo: synthesize/ingest link statistics, fit feature pipelines, train the
// Kitsune ensemble and LSTM models, and build accuracy reports.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_support.hpp"
#include "mmw/dataset.hpp"
#include "mmw/eval.hpp"
#include "mmw/features.hpp"
#include "mmw/kitsune.hpp"
#include "mmw/lstm.hpp"

namespace fs = std::filesystem;
using namespace mmwgeo;
using mmw::eval::ModelFamily;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Global {
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

// ---------------------------------------------------------------- synth

struct SynthOpts {
  std::string out;
  std::string config_file;
  std::size_t rows_per_class = 250;
  double noise_sigma = 1.0;
  double separation = 6.0;
  double counter_rate = 100.0;
  std::vector<double> heldout;
};

int cmd_synth(const SynthOpts& o, const Global& g, const CLI::App& sub) {
  mmw::SynthConfig c;
  json inputs = json::object();
  if (!o.config_file.empty()) {
    c = mmw::SynthConfig::load(o.config_file);
    inputs["synth_config"] = input_entry(o.config_file);
  }
  if (sub.count("--rows-per-class")) c.rows_per_class = o.rows_per_class;
  if (sub.count("--noise-sigma")) c.noise_sigma = o.noise_sigma;
  if (sub.count("--separation")) c.separation = o.separation;
  if (sub.count("--counter-rate")) c.counter_rate = o.counter_rate;
  c.validate();
  json config = c.to_json();
  config["seed"] = g.seed;
  json meta;
  if (o.heldout.empty()) {
    const auto ds = mmw::synth_generate(c, g.seed);
    mmw::write_csv(ds, o.out);
    meta = {{"kind", "labeled"}, {"counters", "raw"}, {"rows", ds.size()}, {"content_hash", ds.content_hash()}};
  } else {
    config["heldout_feet"] = o.heldout;
    const auto ds = mmw::synth_generate_heldout(c, o.heldout, g.seed);
    mmw::write_csv(ds, o.out);
    meta = {{"kind", "heldout"}, {"counters", "raw"}, {"rows", ds.size()}};
  }
  meta["provenance"] = provenance("synth", config, inputs);
  write_meta(o.out, meta);
  std::cout << "wrote " << meta["rows"] << " rows to " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- ingest

struct IngestOpts {
  std::string in, out, test_out;
  double test_fraction = 0.0;
  bool heldout = false;
};

int cmd_ingest(const IngestOpts& o, const Global& g) {
  const json inputs = {{"raw", input_entry(o.in)}};
  json config = {{"heldout", o.heldout}};
  const auto schema = mmw::read_csv_schema(o.in);
  if (o.heldout) {
    const auto ds = mmw::normalize_counters(mmw::parse_unlabeled(o.in, schema));
    mmw::write_csv(ds, o.out);
    write_meta(o.out, {{"kind", "heldout"}, {"counters", "normalized"}, {"rows", ds.size()},
                       {"provenance", provenance("ingest", config, inputs)}});
    std::cout << "wrote " << ds.size() << " held-out rows to " << o.out << "\n";
    return 0;
  }
  const auto ds = mmw::normalize_counters(mmw::parse_csv(o.in, schema));
  if (o.test_fraction == 0.0) {
    if (!o.test_out.empty()) throw mmw::ConfigError("--test-out needs --test-fraction");
    mmw::write_csv(ds, o.out);
    write_meta(o.out, {{"kind", "labeled"},
                       {"counters", "normalized"},
                       {"rows", ds.size()},
                       {"content_hash", ds.content_hash()},
                       {"split", "none"},
                       {"provenance", provenance("ingest", config, inputs)}});
    std::cout << "wrote " << ds.size() << " rows to " << o.out << "\n";
    return 0;
  }
  if (o.test_out.empty()) throw mmw::ConfigError("--test-fraction needs --test-out");
  config["test_fraction"] = o.test_fraction;
  config["seed"] = g.seed;
  const auto sp = mmw::split(ds, o.test_fraction, g.seed);
  std::ostringstream desc;
  desc << "per-class contiguous block, test fraction " << o.test_fraction << ", seed " << g.seed << " ("
       << sp.train.size() << " train / " << sp.test.size() << " test rows)";
  for (const auto& [path, part, role] : {std::tuple{o.out, &sp.train, "train"}, std::tuple{o.test_out, &sp.test, "test"}}) {
    mmw::write_csv(*part, path);
    write_meta(path, {{"kind", "labeled"},
                      {"counters", "normalized"},
                      {"rows", part->size()},
                      {"content_hash", part->content_hash()},
                      {"role", role},
                      {"split", desc.str()},
                      {"provenance", provenance("ingest", config, inputs)}});
  }
  std::cout << "wrote " << sp.train.size() << " train rows to " << o.out << " and " << sp.test.size()
            << " test rows to " << o.test_out << "\n";
  return 0;
}

// ---------------------------------------------------------------- featurize

struct FeaturizeOpts {
  std::string in, out, curve;
  std::string kind = "pca";
  std::size_t k = mmw::kDefaultSelectionK;
  int bins = mmw::kDefaultMrmrBins;
};

int cmd_featurize(const FeaturizeOpts& o) {
  const auto kind = mmw::pipeline_kind_from_string(o.kind);
  const auto train = load_ingested(o.in);
  const json inputs = {{"train", input_entry(o.in)}};
  json config = {{"kind", o.kind}};
  mmw::FeaturePipeline p;
  switch (kind) {
    case mmw::PipelineKind::Empirical: p = mmw::empirical_select(train); break;
    case mmw::PipelineKind::Mrmr:
      config["k"] = o.k;
      config["bins"] = o.bins;
      p = mmw::mrmr_select(train, o.k, o.bins);
      break;
    case mmw::PipelineKind::Pca:
      config["k"] = o.k;
      p = mmw::pca_fit(train, o.k);
      break;
  }
  json j = p.to_json();
  j["provenance"] = provenance("featurize", config, inputs);
  mmw::json_io::save(j, o.out);
  std::cout << "wrote " << o.kind << " pipeline (" << p.k() << " features) to " << o.out << "\n";
  if (kind == mmw::PipelineKind::Pca) {
    const auto path = o.curve.empty() ? sibling(o.out, ".variance.csv") : o.curve;
    std::ostringstream csv;
    csv << "k,cumulative_ratio\n";
    for (const auto& [k, r] : mmw::explained_variance_curve(train)) {
      csv << k << ',' << mmw::csv_detail::format_double(r) << '\n';
    }
    write_text(path, csv.str());
    write_meta(path, {{"provenance", provenance("featurize", config, inputs)}});
    std::cout << "wrote explained-variance curve to " << path << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- train kitsune

struct KitsuneOpts {
  std::string in, pipeline, out;
  std::string target = "joint";
  std::size_t m = 10;
  std::size_t fm_prefix = 200;
  double lr = 0.1;
  double hidden_ratio = 0.75;
  bool no_decay = false;
  bool no_clamp = false;
  std::string loss = "cross_entropy";
  bool single_pass = false;
};

mmw::kitsune::KitsuneConfig kitsune_config(const KitsuneOpts& o) {
  mmw::kitsune::KitsuneConfig c;
  c.max_cluster = o.m;
  c.fm_prefix = o.fm_prefix;
  c.autoencoder.learning_rate = o.lr;
  c.autoencoder.hidden_ratio = o.hidden_ratio;
  c.autoencoder.decay = !o.no_decay;
  c.autoencoder.clamp = !o.no_clamp;
  c.autoencoder.loss = mmw::kitsune::loss_from_string(o.loss);
  c.validate();
  return c;
}

void check_single_pass(bool enabled, std::uint64_t consumed, std::size_t rows) {
  if (enabled && consumed != rows) {
    throw mmw::TrainingError(0, "single-pass violated: " + std::to_string(consumed) + " updates for " +
                                    std::to_string(rows) + " rows");
  }
}

int cmd_train_kitsune(const KitsuneOpts& o, const Global& g) {
  const auto train = load_ingested(o.in);
  const auto pipe = mmw::FeaturePipeline::load(o.pipeline);
  const auto fm = pipe.apply(train);
  const auto cfg = kitsune_config(o);
  const json inputs = {{"train", input_entry(o.in)}, {"pipeline", input_entry(o.pipeline)}};
  json config = {{"target", o.target}, {"kitsune", cfg.to_json()}, {"seed", g.seed}, {"single_pass", o.single_pass}};
  json model = {{"format", "mmw.kitsune_model"}, {"version", 1}, {"family", "Kitsune"}, {"target", o.target},
                {"pipeline", pipe.to_json()}};
  const auto rows = static_cast<std::size_t>(fm.rows());
  std::uint64_t consumed = 0;
  if (o.target == "angle-per-distance") {
    const auto bundle = mmw::kitsune::angle_per_distance_train(fm.values, fm.labels, cfg, g.seed, g.jobs);
    for (const auto& e : bundle.ensembles) consumed += e.samples_trained();
    check_single_pass(o.single_pass, consumed, rows);
    model["kind"] = "angle_per_distance";
    model["bundle"] = bundle.to_json();
  } else if (o.target == "regression") {
    std::vector<Eigen::Index> d10;
    for (std::size_t i = 0; i < fm.labels.size(); ++i) {
      if (fm.labels[i].distance == mmw::Distance::D10) d10.push_back(static_cast<Eigen::Index>(i));
    }
    if (d10.empty()) throw mmw::FitError("no 10ft rows to train the calibration model");
    const auto calib = mmw::kitsune::train_class_model(fm.values(d10, Eigen::all), cfg, mmw::mix_seed(g.seed, 0));
    consumed = calib.samples_trained();
    check_single_pass(o.single_pass, consumed, d10.size());
    const auto reg =
        mmw::kitsune::fit_distance_regression(mmw::kitsune::mean_rmse_by_distance(calib, fm.values, fm.labels));
    model["kind"] = "distance_regression";
    model["calibration_model"] = calib.to_json();
    model["regression"] = reg.to_json();
    const auto path = sibling(o.out, ".regression.csv");
    std::ostringstream csv;
    csv << "feet,mean_rmse,fitted_feet\n";
    for (const auto& p : reg.points) {
      csv << p.feet << ',' << mmw::csv_detail::format_double(p.mean_rmse) << ','
          << mmw::csv_detail::format_double(reg.predict_feet(p.mean_rmse)) << '\n';
    }
    write_text(path, csv.str());
    write_meta(path, {{"r_squared", reg.r_squared}, {"provenance", provenance("train kitsune", config, inputs)}});
    std::cout << "distance regression: feet = " << reg.slope << " * rmse + " << reg.intercept
              << " (R^2 = " << reg.r_squared << ")\n";
  } else {
    const auto t = mmw::target_from_string(o.target);
    if (!t) throw mmw::ConfigError("unknown target '" + o.target + "'");
    std::vector<std::size_t> y;
    for (const auto& l : fm.labels) y.push_back(mmw::class_of(l, *t));
    const auto e = mmw::kitsune::ensemble_train(fm.values, y, *t, cfg, g.seed, g.jobs);
    consumed = e.samples_trained();
    check_single_pass(o.single_pass, consumed, rows);
    model["kind"] = "ensemble";
    model["ensemble"] = e.to_json();
  }
  model["samples_trained"] = consumed;
  model["provenance"] = provenance("train kitsune", config, inputs);
  mmw::json_io::save(model, o.out);
  std::cout << "trained kitsune (" << o.target << ") on " << consumed << " samples; wrote " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- train lstm

struct LstmOpts {
  std::string in, pipeline, out, val, log;
  std::string arch = "multihead";
  std::size_t hidden = 64;
  std::size_t window = mmw::lstm::kDefaultWindowLength;
  std::size_t stride = mmw::lstm::kDefaultStride;
  std::size_t epochs = 30;
  std::size_t batch = 32;
  double lr = 1e-3;
};

int cmd_train_lstm(const LstmOpts& o, const Global& g) {
  const auto arch = mmw::lstm::architecture_from_string(o.arch);
  const auto pipe = mmw::FeaturePipeline::load(o.pipeline);
  const auto windows = mmw::lstm::make_windows(pipe.apply(load_ingested(o.in)), o.window, o.stride);
  json inputs = {{"train", input_entry(o.in)}, {"pipeline", input_entry(o.pipeline)}};
  std::vector<mmw::lstm::Window> val;
  if (!o.val.empty()) {
    val = mmw::lstm::make_windows(pipe.apply(load_ingested(o.val)), o.window, o.stride);
    inputs["validation"] = input_entry(o.val);
  }
  mmw::lstm::TrainConfig tc;
  tc.hidden = o.hidden;
  tc.epochs = o.epochs;
  tc.batch = o.batch;
  tc.learning_rate = o.lr;
  tc.jobs = g.jobs;
  json config = {{"arch", o.arch}, {"window", o.window}, {"stride", o.stride}, {"train", tc.to_json()}, {"seed", g.seed}};
  const auto result = mmw::lstm::train(arch, windows, tc, g.seed, val.empty() ? nullptr : &val);

  json model = {{"format", "mmw.lstm_model"},
                {"version", 1},
                {"family", arch == mmw::lstm::Architecture::Multiclass ? "Multiclass" : "Multihead"},
                {"window", o.window},
                {"stride", o.stride},
                {"pipeline", pipe.to_json()},
                {"model", result.model.to_json()},
                {"provenance", provenance("train lstm", config, inputs)}};
  mmw::json_io::save(model, o.out);

  const auto log_path = o.log.empty() ? sibling(o.out, ".log.csv") : o.log;
  std::ostringstream csv;
  csv << "epoch,train_loss,val_distance_acc,val_angle_acc\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string() : mmw::csv_detail::format_double(v); };
  for (const auto& e : result.log) {
    csv << e.epoch << ',' << mmw::csv_detail::format_double(e.train_loss) << ',' << cell(e.val_distance_acc) << ','
        << cell(e.val_angle_acc) << '\n';
  }
  write_text(log_path, csv.str());
  write_meta(log_path, {{"provenance", provenance("train lstm", config, inputs)}});
  const auto& last = result.log.back();
  std::cout << "trained " << o.arch << " LSTM on " << windows.size() << " windows; final loss " << last.train_loss;
  if (!val.empty()) std::cout << ", val distance " << last.val_distance_acc << ", val angle " << last.val_angle_acc;
  std::cout << "\nwrote " << o.out << " and " << log_path << "\n";
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOpts {
  std::string test, out;
  std::vector<std::string> models;
  bool per_distance_angle = false;
  bool no_reference = false;
};

std::vector<std::size_t> angles_of(const std::vector<mmw::ClassLabel>& labels) {
  std::vector<std::size_t> a;
  for (const auto& l : labels) a.push_back(l.angle_index());
  return a;
}

std::vector<std::size_t> distances_of(const std::vector<mmw::ClassLabel>& labels) {
  std::vector<std::size_t> d;
  for (const auto& l : labels) d.push_back(l.distance_index());
  return d;
}

mmw::eval::EvalResult evaluate_model(const std::string& path, const mmw::LabeledDataset& test, bool per_distance) {
  using namespace mmw::eval;
  const json m = mmw::json_io::load(path);
  const auto format = m.value("format", "");
  const auto pipe = mmw::FeaturePipeline::from_json(m.at("pipeline"));
  const auto fm = pipe.apply(test);
  EvalResult r;
  r.features = pipe.kind;
  r.metadata = {{"model_file", fs::path(path).filename().string()},
                {"model_fnv1a", mmw::hash_file(path)},
                {"model_config", m.at("provenance").at("config")}};
  if (format == "mmw.kitsune_model") {
    mmw::json_io::expect_format(m, "mmw.kitsune_model", 1);
    r.model = ModelFamily::Kitsune;
    const auto kind = m.at("kind").get<std::string>();
    const auto truth_d = distances_of(fm.labels), truth_a = angles_of(fm.labels);
    if (kind == "ensemble") {
      const auto e = mmw::kitsune::KitsuneEnsemble::from_json(m.at("ensemble"));
      const auto pred = e.predict(fm.values);
      std::vector<std::size_t> pd, pa;
      for (auto p : pred) {
        if (e.target == mmw::Target::Joint) {
          pd.push_back(mmw::ClassLabel::from_joint(p).distance_index());
          pa.push_back(mmw::ClassLabel::from_joint(p).angle_index());
        } else if (e.target == mmw::Target::Distance) {
          pd.push_back(p);
        } else {
          pa.push_back(p);
        }
      }
      if (!pd.empty()) r.distance = confusion(pd, truth_d, mmw::Target::Distance);
      if (!pa.empty()) {
        r.angle = confusion(pa, truth_a, mmw::Target::Angle);
        if (per_distance) r.per_distance_angle = per_distance_angle_eval(fm.labels, pa);
      }
    } else if (kind == "angle_per_distance") {
      const auto b = mmw::kitsune::AnglePerDistance::from_json(m.at("bundle"));
      std::vector<std::size_t> pa;
      for (Eigen::Index i = 0; i < fm.rows(); ++i) {
        const auto d = fm.labels[static_cast<std::size_t>(i)].distance_index();
        const auto* e = b.for_distance(d);
        if (!e) throw mmw::ConfigError("model has no angle ensemble for " + mmw::distance_name(d));
        pa.push_back(e->classify(fm.values.row(i).transpose()).label);
      }
      r.angle = confusion(pa, truth_a, mmw::Target::Angle);
      r.per_distance_angle = per_distance_angle_eval(fm.labels, pa);
    } else {
      throw mmw::ConfigError("'" + path + "' is a " + kind + " model; use probe-heldout for it");
    }
    r.metadata["rows"] = fm.rows();
    return r;
  }
  mmw::json_io::expect_format(m, "mmw.lstm_model", 1);
  r.model = model_family_from_string(m.at("family").get<std::string>());
  const auto model = mmw::lstm::LstmModel::from_json(m.at("model"));
  const auto windows =
      mmw::lstm::make_windows(fm, m.at("window").get<std::size_t>(), m.at("stride").get<std::size_t>());
  if (windows.empty()) throw mmw::InputError("test data yields no windows");
  std::vector<std::size_t> pd, pa, td, ta;
  std::vector<mmw::ClassLabel> truth;
  for (const auto& w : windows) {
    const auto p = model.predict(w.x);
    pd.push_back(p.distance);
    pa.push_back(p.angle);
    truth.push_back(w.label);
  }
  r.distance = confusion(pd, distances_of(truth), mmw::Target::Distance);
  r.angle = confusion(pa, angles_of(truth), mmw::Target::Angle);
  if (per_distance) r.per_distance_angle = per_distance_angle_eval(truth, pa);
  r.metadata["windows"] = windows.size();
  return r;
}

std::string split_description(const std::string& test_path) {
  const auto meta = read_meta(test_path);
  if (meta.is_object() && meta.contains("split") && meta.at("split").is_string()) return meta.at("split").get<std::string>();
  return "unknown (test file has no ingest metadata)";
}

void write_report_with_meta(const mmw::eval::EvalReport& report, const std::string& dir, bool reference,
                            const json& prov) {
  for (const auto& f : mmw::eval::write_report(report, dir, reference)) {
    if (f.extension() == ".csv") write_meta(f.string(), {{"provenance", prov}});
  }
}

int cmd_eval(const EvalOpts& o) {
  if (o.models.empty()) throw mmw::ConfigError("eval needs at least one --model");
  const auto test = load_ingested(o.test);
  json inputs = {{"test", input_entry(o.test)}, {"models", json::array()}};
  for (const auto& m : o.models) inputs["models"].push_back(input_entry(m));
  const json config = {{"per_distance_angle", o.per_distance_angle}, {"reference_column", !o.no_reference}};
  mmw::eval::EvalReport report;
  for (const auto& m : o.models) mmw::eval::merge_result(report.results, evaluate_model(m, test, o.per_distance_angle));
  const auto prov = provenance("eval", config, inputs);
  report.context = {{"split", split_description(o.test)}, {"test_hash", test.content_hash()}, {"provenance", prov}};
  write_report_with_meta(report, o.out, !o.no_reference, prov);
  std::cout << mmw::eval::table_report(report.results, !o.no_reference, report.context).markdown;
  std::cout << "wrote report to " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportOpts {
  std::vector<std::string> inputs;
  std::string out;
  bool no_reference = false;
};

int cmd_report(const ReportOpts& o) {
  mmw::eval::EvalReport merged;
  json inputs = json::array();
  std::vector<std::string> splits;
  for (const auto& path : o.inputs) {
    const auto r = mmw::eval::EvalReport::from_json(mmw::json_io::load(path));
    inputs.push_back(input_entry(path));
    for (const auto& x : r.results) mmw::eval::merge_result(merged.results, x);
    const auto s = r.context.value("split", std::string("unknown"));
    if (std::find(splits.begin(), splits.end(), s) == splits.end()) splits.push_back(s);
  }
  const auto prov = provenance("report", {{"reference_column", !o.no_reference}}, {{"reports", inputs}});
  std::string split = splits.size() == 1 ? splits.front() : "mixed";
  if (splits.size() > 1) {
    split += ":";
    for (const auto& s : splits) split += " [" + s + "]";
  }
  merged.context = {{"split", split}, {"provenance", prov}};
  write_report_with_meta(merged, o.out, !o.no_reference, prov);
  std::cout << mmw::eval::table_report(merged.results, !o.no_reference, merged.context).markdown;
  return 0;
}

// ---------------------------------------------------------------- probe-heldout

struct ProbeOpts {
  std::string heldout, model, calibration, out;
};

int cmd_probe(const ProbeOpts& o) {
  const json m = mmw::json_io::load(o.model);
  mmw::json_io::expect_format(m, "mmw.kitsune_model", 1);
  if (m.at("kind") != "ensemble") throw mmw::ConfigError("probe-heldout needs a distance or joint kitsune ensemble");
  const auto e = mmw::kitsune::KitsuneEnsemble::from_json(m.at("ensemble"));
  const auto pipe = mmw::FeaturePipeline::from_json(m.at("pipeline"));
  const auto meta = read_meta(o.heldout);
  if (!meta.is_object() || meta.value("counters", "") != "normalized") {
    mmw::log::warn("'" + o.heldout + "' has no ingest metadata; assuming counters are already normalized");
  }
  const auto held = mmw::parse_unlabeled(o.heldout, mmw::read_csv_schema(o.heldout));
  json inputs = {{"heldout", input_entry(o.heldout)}, {"model", input_entry(o.model)}};
  std::optional<mmw::kitsune::KitsuneModel> calib;
  std::optional<mmw::kitsune::DistanceRegression> reg;
  if (!o.calibration.empty()) {
    const json c = mmw::json_io::load(o.calibration);
    mmw::json_io::expect_format(c, "mmw.kitsune_model", 1);
    if (c.at("kind") != "distance_regression") throw mmw::ConfigError("--calibration needs a regression model");
    if (mmw::FeaturePipeline::from_json(c.at("pipeline")).to_json() != pipe.to_json()) {
      throw mmw::ConfigError("calibration model uses a different feature pipeline");
    }
    calib = mmw::kitsune::KitsuneModel::from_json(c.at("calibration_model"));
    reg = mmw::kitsune::DistanceRegression::from_json(c.at("regression"));
    inputs["calibration"] = input_entry(o.calibration);
  }
  const auto groups = mmw::eval::heldout_probe(e, pipe.apply(held), held.distance_ft, calib ? &*calib : nullptr,
                                               reg ? &*reg : nullptr);
  json out = {{"format", "mmw.heldout_probe"}, {"version", 1}, {"groups", json::array()}};
  for (const auto& g : groups) {
    out["groups"].push_back(g.to_json());
    std::cout << g.feet << " ft: " << g.rows << " rows;";
    for (std::size_t d = 0; d < mmw::kDistanceCount; ++d) std::cout << ' ' << mmw::distance_name(d) << '=' << g.predicted_distance[d];
    if (g.estimated_feet) std::cout << "; regression estimate " << *g.estimated_feet << " ft";
    std::cout << "\n";
  }
  out["provenance"] = provenance("probe-heldout", json::object(), inputs);
  mmw::json_io::save(out, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmWave link geometry classification toolkit", "mmwgeo"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);
  Global g;
  app.add_option("--seed", g.seed, "Global random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads for independent trainings")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--config", "JSON object of flag values for the subcommand (command-line flags win)");

  SynthOpts so;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled (or held-out) capture CSV");
  synth->add_option("-o,--out", so.out, "Output CSV")->required();
  synth->add_option("--synth-config", so.config_file, "SynthConfig JSON");
  synth->add_option("--rows-per-class", so.rows_per_class)->capture_default_str();
  synth->add_option("--noise-sigma", so.noise_sigma)->capture_default_str();
  synth->add_option("--separation", so.separation, "Mean shift per distance step, in feature scale units")->capture_default_str();
  synth->add_option("--counter-rate", so.counter_rate)->capture_default_str();
  synth->add_option("--heldout", so.heldout, "Write unlabeled captures at these distances (ft), e.g. 25,35")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  IngestOpts io;
  auto* ingest = app.add_subcommand("ingest", "Validate a capture CSV, difference counters, optionally split");
  ingest->add_option("-i,--in", io.in)->required()->check(CLI::ExistingFile);
  ingest->add_option("-o,--out", io.out, "Normalized (train) CSV")->required();
  ingest->add_option("--test-fraction", io.test_fraction, "Fraction of each class held out as test")->check(CLI::Range(0.0, 1.0));
  ingest->add_option("--test-out", io.test_out, "Test CSV when splitting");
  ingest->add_flag("--heldout", io.heldout, "Input is an unlabeled held-out capture file");

  FeaturizeOpts fo;
  auto* featurize = app.add_subcommand("featurize", "Fit a feature pipeline on an ingested training CSV");
  featurize->add_option("-i,--in", fo.in)->required()->check(CLI::ExistingFile);
  featurize->add_option("-o,--out", fo.out, "Pipeline JSON")->required();
  featurize->add_option("--kind", fo.kind)->check(CLI::IsMember({"empirical", "mrmr", "pca"}))->capture_default_str();
  featurize->add_option("--k", fo.k, "Selected features / components")->capture_default_str();
  featurize->add_option("--bins", fo.bins, "MRMR discretization bins")->capture_default_str();
  featurize->add_option("--curve", fo.curve, "PCA explained-variance CSV (default: next to the pipeline)");

  auto* train = app.add_subcommand("train", "Train a model");
  train->require_subcommand(1);
  KitsuneOpts ko;
  auto* tk = train->add_subcommand("kitsune", "Per-class Kitsune ensemble (single pass)");
  tk->add_option("-i,--in", ko.in)->required()->check(CLI::ExistingFile);
  tk->add_option("--pipeline", ko.pipeline)->required()->check(CLI::ExistingFile);
  tk->add_option("-o,--out", ko.out)->required();
  tk->add_option("--target", ko.target)
      ->check(CLI::IsMember({"distance", "angle", "joint", "angle-per-distance", "regression"}))
      ->capture_default_str();
  tk->add_option("--m", ko.m, "Max feature-map cluster size")->capture_default_str();
  tk->add_option("--fm-prefix", ko.fm_prefix, "Rows used to fit each feature map")->capture_default_str();
  tk->add_option("--lr", ko.lr)->capture_default_str();
  tk->add_option("--hidden-ratio", ko.hidden_ratio)->capture_default_str();
  tk->add_option("--loss", ko.loss)->check(CLI::IsMember({"cross_entropy", "squared_error"}))->capture_default_str();
  tk->add_flag("--no-decay", ko.no_decay, "Constant learning rate instead of lr/sqrt(t)");
  tk->add_flag("--no-clamp", ko.no_clamp, "Do not clamp scaled inputs to [0,1]");
  tk->add_flag("--single-pass", ko.single_pass, "Fail unless every training row was consumed exactly once");

  LstmOpts lo;
  auto* tl = train->add_subcommand("lstm", "Windowed LSTM (multiclass or multihead)");
  tl->add_option("-i,--in", lo.in)->required()->check(CLI::ExistingFile);
  tl->add_option("--pipeline", lo.pipeline)->required()->check(CLI::ExistingFile);
  tl->add_option("-o,--out", lo.out)->required();
  tl->add_option("--arch", lo.arch)->check(CLI::IsMember({"multiclass", "multihead"}))->capture_default_str();
  tl->add_option("--hidden", lo.hidden)->capture_default_str();
  tl->add_option("--window", lo.window)->capture_default_str();
  tl->add_option("--stride", lo.stride)->capture_default_str();
  tl->add_option("--epochs", lo.epochs)->capture_default_str();
  tl->add_option("--batch", lo.batch)->capture_default_str();
  tl->add_option("--lr", lo.lr)->capture_default_str();
  tl->add_option("--val", lo.val, "Ingested validation CSV scored after every epoch")->check(CLI::ExistingFile);
  tl->add_option("--log", lo.log, "Training log CSV (default: next to the model)");

  EvalOpts eo;
  auto* ev = app.add_subcommand("eval", "Score models on an ingested test CSV");
  ev->add_option("--test", eo.test)->required()->check(CLI::ExistingFile);
  ev->add_option("--model", eo.models, "Model JSON (repeatable)")
      ->required()
      ->check(CLI::ExistingFile)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  ev->add_option("-o,--out", eo.out, "Report directory")->required();
  ev->add_flag("--per-distance-angle", eo.per_distance_angle, "Also emit angle matrices per distance class");
  ev->add_flag("--no-reference", eo.no_reference, "Omit the published-accuracy comparison column");

  ReportOpts ro;
  auto* rep = app.add_subcommand("report", "Merge report.json files into one table");
  rep->add_option("-i,--in", ro.inputs)->required()->check(CLI::ExistingFile)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  rep->add_option("-o,--out", ro.out)->required();
  rep->add_flag("--no-reference", ro.no_reference);

  ProbeOpts po;
  auto* probe = app.add_subcommand("probe-heldout", "Histogram predictions on captures at untrained distances");
  probe->add_option("--heldout", po.heldout)->required()->check(CLI::ExistingFile);
  probe->add_option("--model", po.model, "Distance or joint kitsune ensemble")->required()->check(CLI::ExistingFile);
  probe->add_option("--calibration", po.calibration, "Kitsune regression model")->check(CLI::ExistingFile);
  probe->add_option("-o,--out", po.out)->required();

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : kExitUsage;
    }
    if (*synth) return cmd_synth(so, g, *synth);
    if (*ingest) return cmd_ingest(io, g);
    if (*featurize) return cmd_featurize(fo);
    if (*tk) return cmd_train_kitsune(ko, g);
    if (*tl) return cmd_train_lstm(lo, g);
    if (*ev) return cmd_eval(eo);
    if (*rep) return cmd_report(ro);
    if (*probe) return cmd_probe(po);
    return kExitUsage;
  } catch (const mmw::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const mmw::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
