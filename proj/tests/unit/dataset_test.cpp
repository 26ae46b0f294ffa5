#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "mmw/dataset.hpp"
#include "support/temp_dir.hpp"

using namespace mmw;

namespace {

LabeledDataset tiny_dataset(std::size_t rows_per_capture, std::size_t captures) {
  LabeledDataset ds{LinkStatsSchema::default_schema(), {}, {}, {}};
  double t = 0;
  for (std::size_t c = 0; c < captures; ++c) {
    for (std::size_t r = 0; r < rows_per_capture; ++r) {
      LinkStatsRecord rec{t, std::vector<double>(kFeatureCount, 0.0)};
      for (std::size_t f = 0; f < kFeatureCount; ++f) rec.values[f] = static_cast<double>(c * 100 + r) + 0.25 * f;
      ds.push_back(rec, ClassLabel::from_joint(c % kJointCount), c);
      t += 1;
    }
  }
  return ds;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string header_line(const LinkStatsSchema& s, const std::vector<std::string>& skip = {},
                        const std::vector<std::string>& extra = {}) {
  std::string line;
  auto add = [&](const std::string& n) {
    for (const auto& k : skip)
      if (k == n) return;
    if (!line.empty()) line += ',';
    line += n;
  };
  for (const auto& n : s.feature_names()) add(n);
  for (auto n : {"distance_ft", "angle_deg", "capture_id"}) add(n);
  for (const auto& e : extra) add(e);
  return line;
}

std::string data_line(double v, const std::string& dist, const std::string& ang, const std::string& cap) {
  std::string line;
  for (std::size_t f = 0; f < kFeatureCount; ++f) line += std::to_string(v) + ",";
  return line + dist + "," + ang + "," + cap;
}

}  // namespace

TEST(Labels, JointIndexCoversTwentyClasses) {
  std::set<std::size_t> seen;
  for (std::size_t d = 0; d < kDistanceCount; ++d) {
    for (std::size_t a = 0; a < kAngleCount; ++a) {
      ClassLabel l{static_cast<Distance>(d), static_cast<Angle>(a)};
      seen.insert(l.joint_index());
      EXPECT_EQ(ClassLabel::from_joint(l.joint_index()), l);
    }
  }
  EXPECT_EQ(seen.size(), 20u);
  EXPECT_FALSE(distance_from_feet(25).has_value());
  EXPECT_FALSE(distance_from_feet(35).has_value());
  EXPECT_EQ(*angle_from_degrees(180), Angle::A180);
}

TEST(Schema, DefaultSchemaHoldsNamedFeaturesAndCounters) {
  const auto s = LinkStatsSchema::default_schema();
  ASSERT_EQ(s.size(), 31u);
  for (const auto& n : required_feature_names()) EXPECT_TRUE(s.index_of(n).has_value()) << n;
  EXPECT_EQ(required_feature_names().size(), 15u);
  EXPECT_TRUE(s.is_counter(s.require_index("Ethernet Packets Sent")));
  EXPECT_TRUE(s.is_counter(s.require_index("TXSS periods SSW frame recv")));
  EXPECT_FALSE(s.is_counter(s.require_index("Rx Power")));
  EXPECT_EQ(std::count(s.counter_flags().begin(), s.counter_flags().end(), true), 4);
}

TEST(Schema, RejectsBadHeaders) {
  auto names = LinkStatsSchema::default_schema().feature_names();
  auto dup = names;
  dup[20] = dup[21];
  EXPECT_THROW(LinkStatsSchema::from_header(dup), SchemaError);
  auto missing = names;
  missing[0] = "Something Else";
  EXPECT_THROW(LinkStatsSchema::from_header(missing), SchemaError);
  auto short_names = names;
  short_names.pop_back();
  EXPECT_THROW(LinkStatsSchema::from_header(short_names), SchemaError);
  EXPECT_NO_THROW(LinkStatsSchema::from_header(names));
}

TEST(Csv, ThreeRowRoundTrip) {
  test_support::TempDir dir;
  auto ds = tiny_dataset(3, 1);
  write_csv(ds, dir.file("a.csv"));
  auto back = parse_csv(dir.file("a.csv"), ds.schema);
  EXPECT_EQ(back.size(), 3u);
  EXPECT_EQ(back, ds);
}

TEST(Csv, EmptyDatasetIsHeaderOnly) {
  test_support::TempDir dir;
  LabeledDataset ds{LinkStatsSchema::default_schema(), {}, {}, {}};
  write_csv(ds, dir.file("e.csv"));
  const auto text = slurp(dir.file("e.csv"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(text, header_line(ds.schema) + "\n");
  EXPECT_EQ(parse_csv(dir.file("e.csv"), ds.schema).size(), 0u);
}

TEST(Csv, OneRecordIsTwoLines) {
  test_support::TempDir dir;
  auto ds = tiny_dataset(1, 1);
  write_csv(ds, dir.file("one.csv"));
  const auto text = slurp(dir.file("one.csv"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Csv, RandomRoundTripIsBitExact) {
  test_support::TempDir dir;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  std::uniform_int_distribution<std::size_t> cls(0, kJointCount - 1);
  for (int trial = 0; trial < 5; ++trial) {
    LabeledDataset ds{LinkStatsSchema::default_schema(), {}, {}, {}};
    for (std::size_t i = 0; i < 100; ++i) {
      LinkStatsRecord r{static_cast<double>(i), std::vector<double>(kFeatureCount)};
      for (auto& v : r.values) v = std::ldexp(mant(rng), expo(rng) / 10);
      r.values[3] = -0.0;
      r.values[4] = std::numeric_limits<double>::denorm_min();
      r.values[5] = std::numeric_limits<double>::max();
      ds.push_back(r, ClassLabel::from_joint(cls(rng)), i);
    }
    write_csv(ds, dir.file("r.csv"));
    auto back = parse_csv(dir.file("r.csv"), ds.schema);
    ASSERT_EQ(back.size(), ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        EXPECT_EQ(std::bit_cast<std::uint64_t>(back.records[i].values[f]),
                  std::bit_cast<std::uint64_t>(ds.records[i].values[f]));
      }
    }
    EXPECT_EQ(back, ds);
  }
}

TEST(Csv, MissingLabelColumnIsSchemaMismatch) {
  std::stringstream ss;
  const auto s = LinkStatsSchema::default_schema();
  ss << header_line(s, {"angle_deg"}) << "\n";
  try {
    parse_csv(ss, s);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("angle_deg"), std::string::npos);
  }
}

TEST(Csv, ExtraColumnIsNamed) {
  std::stringstream ss;
  const auto s = LinkStatsSchema::default_schema();
  ss << header_line(s, {}, {"bogus"}) << "\n";
  try {
    parse_csv(ss, s);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
}

TEST(Csv, NonNumericCellReportsRowAndColumn) {
  std::stringstream ss;
  const auto s = LinkStatsSchema::default_schema();
  auto row = data_line(1.0, "10", "0", "0");
  row.replace(0, row.find(','), "abc");
  ss << header_line(s) << "\n" << data_line(1.0, "10", "0", "0") << "\n" << row << "\n";
  try {
    parse_csv(ss, s);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), "Rx Power");
  }
}

TEST(Csv, HeldOutDistanceIsLabelErrorButLoadsUnlabeled) {
  const auto s = LinkStatsSchema::default_schema();
  std::string text = header_line(s) + "\n" + data_line(1.0, "25", "45", "0") + "\n";
  std::stringstream a(text), b(text);
  EXPECT_THROW(parse_csv(a, s), LabelError);
  auto held = parse_unlabeled(b, s);
  ASSERT_EQ(held.size(), 1u);
  EXPECT_EQ(held.distance_ft[0], 25.0);
  EXPECT_EQ(held.angle_deg[0], 45.0);
}

TEST(Csv, UnknownAngleIsLabelError) {
  const auto s = LinkStatsSchema::default_schema();
  std::stringstream ss(header_line(s) + "\n" + data_line(1.0, "10", "30", "0") + "\n");
  EXPECT_THROW(parse_csv(ss, s), LabelError);
}

TEST(Csv, ColumnOrderIsFreeButValuesFollowSchema) {
  const auto s = LinkStatsSchema::default_schema();
  std::string header = "capture_id,angle_deg,distance_ft";
  std::string row = "7,90,30";
  for (std::size_t f = kFeatureCount; f-- > 0;) {
    header += "," + s.feature_names()[f];
    row += "," + std::to_string(f);
  }
  std::stringstream ss(header + "\n" + row + "\n");
  auto ds = parse_csv(ss, s);
  ASSERT_EQ(ds.size(), 1u);
  for (std::size_t f = 0; f < kFeatureCount; ++f) EXPECT_EQ(ds.value(0, f), static_cast<double>(f));
  EXPECT_EQ(ds.labels[0], (ClassLabel{Distance::D30, Angle::A90}));
  EXPECT_EQ(ds.capture_ids[0], 7u);
}

TEST(Counters, ConstantCounterBecomesZeros) {
  auto ds = tiny_dataset(3, 1);
  const auto c = ds.schema.require_index("Ethernet Packets Sent");
  for (auto& r : ds.records) r.values[c] = 5.0;
  auto out = normalize_counters(ds);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.value(0, c), 0.0);
  EXPECT_EQ(out.value(1, c), 0.0);
}

TEST(Counters, GaugeColumnOnlyLosesFirstRow) {
  auto ds = tiny_dataset(3, 1);
  const auto g = ds.schema.require_index("Rx Power");
  ds.records[0].values[g] = -42.0;
  ds.records[1].values[g] = -41.5;
  ds.records[2].values[g] = -42.1;
  auto out = normalize_counters(ds);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.value(0, g), -41.5);
  EXPECT_EQ(out.value(1, g), -42.1);
  EXPECT_EQ(out.labels[0], ds.labels[1]);
  EXPECT_EQ(out.records[0].timestamp, ds.records[1].timestamp);
}

TEST(Counters, CumsumThenDiffRecoversIncrements) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long long> inc(0, 1'000'000);
  auto ds = tiny_dataset(50, 4);
  std::vector<std::vector<double>> increments(ds.size(), std::vector<double>(kFeatureCount));
  std::size_t row = 0;
  for (const auto& run : capture_runs(ds.capture_ids)) {
    std::vector<double> acc(kFeatureCount, 1e9);
    for (std::size_t i = run.begin; i < run.end; ++i, ++row) {
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (!ds.schema.is_counter(f)) continue;
        increments[i][f] = static_cast<double>(inc(rng));
        acc[f] += increments[i][f];
        ds.records[i].values[f] = acc[f];
      }
    }
  }
  auto out = normalize_counters(ds);
  ASSERT_EQ(out.size(), ds.size() - 4);
  std::size_t k = 0;
  for (const auto& run : capture_runs(ds.capture_ids)) {
    for (std::size_t i = run.begin + 1; i < run.end; ++i, ++k) {
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (ds.schema.is_counter(f)) {
          EXPECT_EQ(out.value(k, f), increments[i][f]);
        } else {
          EXPECT_EQ(out.value(k, f), ds.value(i, f));
        }
      }
    }
  }
}

TEST(Counters, SingleRowCaptureIsDegenerate) {
  auto ds = tiny_dataset(3, 2);
  ds.records.pop_back();
  ds.labels.pop_back();
  ds.capture_ids.pop_back();
  ds.records.pop_back();
  ds.labels.pop_back();
  ds.capture_ids.pop_back();
  EXPECT_THROW(normalize_counters(ds), DegenerateCaptureError);
}

TEST(Counters, GaugeColumnsPassThroughRepeatedNormalization) {
  auto ds = synth_generate(SynthConfig{10, 1.0, 2.0, 50.0}, 3);
  auto once = normalize_counters(ds);
  auto twice = normalize_counters(once);
  std::size_t k2 = 0;
  for (std::size_t i = 0; i < once.size(); ++i) {
    if (i > 0 && once.capture_ids[i] == once.capture_ids[i - 1]) {
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (!ds.schema.is_counter(f)) EXPECT_EQ(twice.value(k2, f), once.value(i, f));
      }
      ++k2;
    }
  }
  EXPECT_EQ(k2, twice.size());
}

namespace {
LabeledDataset grid_dataset(std::size_t rows_per_class) {
  SynthConfig c;
  c.rows_per_class = rows_per_class;
  return synth_generate(c, 11);
}

std::vector<std::size_t> per_class_counts(const LabeledDataset& ds) {
  std::vector<std::size_t> out(kJointCount, 0);
  for (const auto& l : ds.labels) ++out[l.joint_index()];
  return out;
}
}  // namespace

TEST(Split, HalfFractionStratifiesEveryClass) {
  auto ds = grid_dataset(100);
  auto s = split(ds, 0.5, 1);
  for (auto n : per_class_counts(s.test)) EXPECT_EQ(n, 50u);
  for (auto n : per_class_counts(s.train)) EXPECT_EQ(n, 50u);
  EXPECT_NO_THROW(s.train.validate());
  EXPECT_NO_THROW(s.test.validate());
}

TEST(Split, SameSeedIsIdentical) {
  auto ds = grid_dataset(40);
  auto a = split(ds, 0.3, 9);
  auto b = split(ds, 0.3, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
}

TEST(Split, DifferentSeedsDifferentPartitionSameCounts) {
  auto ds = grid_dataset(60);
  for (std::uint64_t seed = 1; seed < 6; ++seed) {
    auto a = split(ds, 0.25, seed);
    auto b = split(ds, 0.25, seed + 1);
    EXPECT_EQ(per_class_counts(a.test), per_class_counts(b.test));
    EXPECT_NE(a.test.records, b.test.records);
  }
}

TEST(Split, TestSideIsContiguousBlockPerClass) {
  auto ds = grid_dataset(30);
  auto s = split(ds, 0.4, 5);
  // Each class contributes one cyclic segment: at most two pieces on either side.
  std::vector<std::set<CaptureId>> pieces(kJointCount);
  for (std::size_t i = 0; i < s.test.size(); ++i) pieces[s.test.labels[i].joint_index()].insert(s.test.capture_ids[i]);
  for (const auto& p : pieces) EXPECT_LE(p.size(), 2u);
  std::set<double> train_ts, test_ts;
  for (const auto& r : s.train.records) train_ts.insert(r.timestamp);
  for (const auto& r : s.test.records) {
    EXPECT_FALSE(train_ts.count(r.timestamp));
    test_ts.insert(r.timestamp);
  }
  EXPECT_EQ(train_ts.size() + test_ts.size(), ds.size());
}

TEST(Split, TooFewRowsIsStratificationError) {
  auto ds = grid_dataset(2);
  EXPECT_THROW(split(ds, 0.1, 1), StratificationError);
  EXPECT_THROW(split(ds, 0.0, 1), ConfigError);
}

TEST(Split, MissingClassIsStratificationError) {
  auto ds = tiny_dataset(10, 3);
  EXPECT_THROW(split(ds, 0.5, 1), StratificationError);
}

TEST(Synth, NoiselessClassesAreConstantInGauges) {
  SynthConfig c{20, 0.0, 6.0, 100.0};
  auto ds = synth_generate(c, 1);
  ASSERT_EQ(ds.size(), 400u);
  for (std::size_t i = 1; i < ds.size(); ++i) {
    if (ds.capture_ids[i] != ds.capture_ids[i - 1]) continue;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (!ds.schema.is_counter(f)) EXPECT_EQ(ds.value(i, f), ds.value(i - 1, f));
    }
  }
}

TEST(Synth, PowerMeanStrictlyDecreasesWithDistance) {
  SynthConfig c{200, 1.0, 6.0, 100.0};
  auto ds = synth_generate(c, 2);
  const auto p = ds.schema.require_index("Rx Power");
  std::vector<double> model_mean(kDistanceCount, 0.0), sample_mean(kDistanceCount, 0.0);
  std::vector<double> count(kDistanceCount, 0.0);
  for (std::size_t d = 0; d < kDistanceCount; ++d) {
    for (std::size_t a = 0; a < kAngleCount; ++a) model_mean[d] += synth_class_mean(c, d, a)[p] / kAngleCount;
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    sample_mean[ds.labels[i].distance_index()] += ds.value(i, p);
    count[ds.labels[i].distance_index()] += 1;
  }
  for (std::size_t d = 1; d < kDistanceCount; ++d) {
    EXPECT_LT(model_mean[d], model_mean[d - 1]);
    EXPECT_LT(sample_mean[d] / count[d], sample_mean[d - 1] / count[d - 1]);
  }
}

TEST(Synth, SeedsChangeRowsNotClassMeans) {
  SynthConfig c{400, 1.5, 6.0, 100.0};
  auto a = synth_generate(c, 100);
  auto b = synth_generate(c, 200);
  EXPECT_NE(a.records, b.records);
  const auto p = a.schema.require_index("Rx Power");
  const double bound = 3.0 * c.noise_sigma / std::sqrt(static_cast<double>(c.rows_per_class));
  for (const auto* ds : {&a, &b}) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      double m = 0;
      auto rows = ds->rows_of_class(j);
      for (auto r : rows) m += ds->value(r, p);
      m /= static_cast<double>(rows.size());
      const auto l = ClassLabel::from_joint(j);
      EXPECT_NEAR(m, synth_class_mean(c, l.distance_index(), l.angle_index())[p], bound) << joint_name(j);
    }
  }
}

TEST(Synth, CountersAreNondecreasingIntegerSums) {
  auto ds = synth_generate(SynthConfig{50, 1.0, 6.0, 30.0}, 4);
  for (std::size_t i = 1; i < ds.size(); ++i) {
    if (ds.capture_ids[i] != ds.capture_ids[i - 1]) continue;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (!ds.schema.is_counter(f)) continue;
      const double inc = ds.value(i, f) - ds.value(i - 1, f);
      EXPECT_GE(inc, 0.0);
      EXPECT_EQ(inc, std::floor(inc));
    }
  }
}

TEST(Synth, DeterministicAndValidated) {
  SynthConfig c{5, 1.0, 6.0, 10.0};
  EXPECT_EQ(synth_generate(c, 3), synth_generate(c, 3));
  EXPECT_THROW(synth_generate(SynthConfig{1, 1.0, 6.0, 10.0}, 3), ConfigError);
  EXPECT_THROW(synth_generate(SynthConfig{5, -1.0, 6.0, 10.0}, 3), ConfigError);
}

TEST(Synth, ConfigJson) {
  auto c = SynthConfig::from_json(nlohmann::json::parse(R"({"rows_per_class": 12, "noise_sigma": 0.5,
      "separation": 3, "counter_rate": 7})"));
  EXPECT_EQ(c.rows_per_class, 12u);
  EXPECT_EQ(c.noise_sigma, 0.5);
  EXPECT_EQ(SynthConfig::from_json(c.to_json()).to_json(), c.to_json());
  EXPECT_THROW(SynthConfig::from_json(nlohmann::json::parse(R"({"rows": 3})")), ConfigError);
  EXPECT_THROW(SynthConfig::from_json(nlohmann::json::parse(R"({"noise_sigma": -2})")), ConfigError);
}

TEST(Synth, HeldoutInterpolatesBetweenClasses) {
  SynthConfig c{30, 0.0, 6.0, 10.0};
  auto held = synth_generate_heldout(c, {25.0, 35.0}, 1);
  EXPECT_EQ(held.size(), 2u * 4u * 30u);
  const auto p = held.schema.require_index("Rx Power");
  const double m20 = synth_class_mean(c, 1, 0)[p], m30 = synth_class_mean(c, 2, 0)[p];
  EXPECT_DOUBLE_EQ(held.records[0].values[p], 0.5 * (m20 + m30));
}
