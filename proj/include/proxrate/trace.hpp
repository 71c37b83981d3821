#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "proxrate/problem.hpp"

namespace proxrate {

inline constexpr std::string_view kTraceHeader =
    "k,phi,phi_gap,gs_norm_sq,min_gs_norm_sq,lyapunov,obj_bound,"
    "gradmin_bound,key_ineq_residual";

// Shortest decimal string that round-trips the 64-bit value.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct TraceRow {
  long k = 0;
  double phi = 0.0;
  std::optional<double> phi_gap;
  double gs_norm_sq = 0.0;
  double min_gs_norm_sq = 0.0;
  std::optional<double> lyapunov;
  std::optional<double> obj_bound;
  std::optional<double> gradmin_bound;
  std::optional<double> key_ineq_residual;
};

// Streams rows in the fixed nine-column schema, flushing after every row so
// a partial trace from an aborted run is still well formed up to its last
// line. Absent quantities are rendered as the literal NA.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out) : out_(out) {
    out_ << kTraceHeader << '\n';
    out_.flush();
    if (!out_) throw IoError("trace: failed to write header");
  }

  void write(const TraceRow& row) {
    std::string line;
    line.reserve(160);
    line += std::to_string(row.k);
    append(line, row.phi);
    append(line, row.phi_gap);
    append(line, row.gs_norm_sq);
    append(line, row.min_gs_norm_sq);
    append(line, row.lyapunov);
    append(line, row.obj_bound);
    append(line, row.gradmin_bound);
    append(line, row.key_ineq_residual);
    line += '\n';
    out_ << line;
    out_.flush();
    if (!out_) throw IoError("trace: failed to write row k=" +
                             std::to_string(row.k));
  }

 private:
  static void append(std::string& line, double v) {
    line += ',';
    line += format_double(v);
  }
  static void append(std::string& line, const std::optional<double>& v) {
    line += ',';
    if (v)
      line += format_double(*v);
    else
      line += "NA";
  }
  std::ostream& out_;
};

struct TraceData {
  std::vector<TraceRow> rows;
};

inline std::optional<double> parse_optional_field(const std::string& field,
                                                  const std::string& path,
                                                  std::size_t line_no) {
  if (field == "NA") return std::nullopt;
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw FormatError(path + ":" + std::to_string(line_no) +
                      ": malformed numeric field '" + field + "'");
  return v;
}

inline TraceData load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader)
    throw FormatError(path + ": unexpected header '" + line + "'");
  TraceData data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 9)
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected 9 fields, got " +
                        std::to_string(fields.size()));
    TraceRow row;
    try {
      row.k = std::stol(fields[0]);
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": malformed iteration index '" + fields[0] + "'");
    }
    auto req = [&](const std::string& f) {
      const auto v = parse_optional_field(f, path, line_no);
      if (!v)
        throw FormatError(path + ":" + std::to_string(line_no) +
                          ": NA in a required field");
      return *v;
    };
    row.phi = req(fields[1]);
    row.phi_gap = parse_optional_field(fields[2], path, line_no);
    row.gs_norm_sq = req(fields[3]);
    row.min_gs_norm_sq = req(fields[4]);
    row.lyapunov = parse_optional_field(fields[5], path, line_no);
    row.obj_bound = parse_optional_field(fields[6], path, line_no);
    row.gradmin_bound = parse_optional_field(fields[7], path, line_no);
    row.key_ineq_residual = parse_optional_field(fields[8], path, line_no);
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace proxrate
