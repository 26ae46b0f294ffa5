#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mmw/core/error.hpp"
#include "mmw/dataset/dataset.hpp"

namespace mmw {

inline constexpr std::string_view kDistanceColumn = "distance_ft";
inline constexpr std::string_view kAngleColumn = "angle_deg";
inline constexpr std::string_view kCaptureColumn = "capture_id";

namespace csv_detail {

inline std::vector<std::string> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

inline bool parse_u64(std::string_view s, std::uint64_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Column positions of the features (schema order) and the three label columns.
struct ColumnMap {
  std::vector<std::size_t> feature_cols;
  std::size_t distance_col = 0;
  std::size_t angle_col = 0;
  std::size_t capture_col = 0;
  std::size_t width = 0;
};

inline ColumnMap map_header(const std::vector<std::string>& header, const LinkStatsSchema& schema) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!pos.emplace(header[i], i).second) throw SchemaError("duplicate column '" + header[i] + "'");
  }
  ColumnMap m;
  m.width = header.size();
  auto take = [&](std::string_view name) {
    auto it = pos.find(std::string(name));
    if (it == pos.end()) throw SchemaError("missing column '" + std::string(name) + "'");
    std::size_t c = it->second;
    pos.erase(it);
    return c;
  };
  for (const auto& n : schema.feature_names()) m.feature_cols.push_back(take(n));
  m.distance_col = take(kDistanceColumn);
  m.angle_col = take(kAngleColumn);
  m.capture_col = take(kCaptureColumn);
  if (!pos.empty()) throw SchemaError("unexpected column '" + pos.begin()->first + "'");
  return m;
}

inline std::vector<std::string> read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty CSV: no header row");
  return split_line(line);
}

template <class RowFn>
void for_each_row(std::istream& in, const ColumnMap& cols, const LinkStatsSchema& schema, RowFn&& fn) {
  std::string line;
  std::size_t line_no = 1;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (cells.size() != cols.width) {
      throw ParseError(line_no, "*", "expected " + std::to_string(cols.width) + " cells, got " +
                                         std::to_string(cells.size()));
    }
    LinkStatsRecord rec;
    rec.timestamp = static_cast<double>(row);
    rec.values.resize(schema.size());
    for (std::size_t f = 0; f < schema.size(); ++f) {
      double v;
      if (!parse_double(cells[cols.feature_cols[f]], v) || !std::isfinite(v)) {
        throw ParseError(line_no, schema.feature_names()[f],
                         "not a finite number: '" + cells[cols.feature_cols[f]] + "'");
      }
      rec.values[f] = v;
    }
    double dist, ang;
    std::uint64_t cap;
    if (!parse_double(cells[cols.distance_col], dist) || !std::isfinite(dist)) {
      throw ParseError(line_no, std::string(kDistanceColumn), "not a number");
    }
    if (!parse_double(cells[cols.angle_col], ang) || !std::isfinite(ang)) {
      throw ParseError(line_no, std::string(kAngleColumn), "not a number");
    }
    if (!parse_u64(cells[cols.capture_col], cap)) {
      throw ParseError(line_no, std::string(kCaptureColumn), "not an unsigned integer");
    }
    fn(line_no, std::move(rec), dist, ang, cap);
    ++row;
  }
}

inline ClassLabel to_label(std::size_t line_no, double dist, double ang) {
  auto d = (dist == std::floor(dist)) ? distance_from_feet(static_cast<int>(dist)) : std::nullopt;
  if (!d) {
    throw LabelError("line " + std::to_string(line_no) + ": distance_ft=" + format_double(dist) +
                     " is not a trained distance class (10/20/30/40/50)");
  }
  auto a = (ang == std::floor(ang)) ? angle_from_degrees(static_cast<int>(ang)) : std::nullopt;
  if (!a) {
    throw LabelError("line " + std::to_string(line_no) + ": angle_deg=" + format_double(ang) +
                     " is not a trained angle class (0/45/90/180)");
  }
  return {*d, *a};
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

}  // namespace csv_detail

inline LabeledDataset parse_csv(std::istream& in, const LinkStatsSchema& schema) {
  auto cols = csv_detail::map_header(csv_detail::read_header(in), schema);
  LabeledDataset ds{schema, {}, {}, {}};
  csv_detail::for_each_row(in, cols, schema,
                           [&](std::size_t line_no, LinkStatsRecord rec, double d, double a, CaptureId c) {
                             ds.push_back(std::move(rec), csv_detail::to_label(line_no, d, a), c);
                           });
  ds.validate();
  return ds;
}

inline LabeledDataset parse_csv(const std::string& path, const LinkStatsSchema& schema) {
  auto in = csv_detail::open_in(path);
  return parse_csv(in, schema);
}

/// Reads only the header and derives the schema from it.
inline LinkStatsSchema read_csv_schema(const std::string& path) {
  auto in = csv_detail::open_in(path);
  auto header = csv_detail::read_header(in);
  std::vector<std::string> features;
  for (auto& h : header) {
    if (h != kDistanceColumn && h != kAngleColumn && h != kCaptureColumn) features.push_back(h);
  }
  return LinkStatsSchema::from_header(features);
}

/// Loader for probe captures at untrained distances; labels are kept as raw numbers.
inline HeldoutDataset parse_unlabeled(std::istream& in, const LinkStatsSchema& schema) {
  auto cols = csv_detail::map_header(csv_detail::read_header(in), schema);
  HeldoutDataset ds{schema, {}, {}, {}, {}};
  csv_detail::for_each_row(in, cols, schema,
                           [&](std::size_t, LinkStatsRecord rec, double d, double a, CaptureId c) {
                             ds.records.push_back(std::move(rec));
                             ds.distance_ft.push_back(d);
                             ds.angle_deg.push_back(a);
                             ds.capture_ids.push_back(c);
                           });
  return ds;
}

inline HeldoutDataset parse_unlabeled(const std::string& path, const LinkStatsSchema& schema) {
  auto in = csv_detail::open_in(path);
  return parse_unlabeled(in, schema);
}

namespace csv_detail {
inline void write_header(std::ostream& out, const LinkStatsSchema& schema) {
  for (const auto& n : schema.feature_names()) {
    if (n.find(',') != std::string::npos) throw SchemaError("feature name contains a comma: '" + n + "'");
    out << n << ',';
  }
  out << kDistanceColumn << ',' << kAngleColumn << ',' << kCaptureColumn << '\n';
}

inline void write_row(std::ostream& out, const LinkStatsRecord& r, const std::string& dist,
                      const std::string& ang, CaptureId c) {
  for (double v : r.values) out << format_double(v) << ',';
  out << dist << ',' << ang << ',' << c << '\n';
}

inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}
}  // namespace csv_detail

inline void write_csv(const LabeledDataset& ds, std::ostream& out) {
  csv_detail::write_header(out, ds.schema);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    csv_detail::write_row(out, ds.records[i], std::to_string(feet(ds.labels[i].distance)),
                          std::to_string(degrees(ds.labels[i].angle)), ds.capture_ids[i]);
  }
}

inline void write_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(ds, out);
  csv_detail::finish(out, path);
}

inline void write_csv(const HeldoutDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  csv_detail::write_header(out, ds.schema);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    csv_detail::write_row(out, ds.records[i], csv_detail::format_double(ds.distance_ft[i]),
                          csv_detail::format_double(ds.angle_deg[i]), ds.capture_ids[i]);
  }
  csv_detail::finish(out, path);
}

}  // namespace mmw
