#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "pfio/error.hpp"
#include "pfio/estimate.hpp"
#include "pfio/grid.hpp"

namespace pfio::csv {

inline constexpr const char* kHeader = "experiment,params,sweep_var,sweep_value,measured,fitted_slope,residual";

/// Shortest round-trip decimal, independent of the global locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

inline std::string escape(const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) return f;
  std::string o = "\"";
  for (char c : f) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + "\"";
}

struct Row {
  std::string experiment;
  std::string params;
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string measured;  // a number, or a skipped(...) note
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
};

inline std::string to_line(const Row& r) {
  return escape(r.experiment) + "," + escape(r.params) + "," + escape(r.sweep_var) + "," +
         format_double(r.sweep_value) + "," + escape(r.measured) + "," + format_double(r.fitted_slope) + "," +
         format_double(r.residual);
}

inline std::string to_text(const std::vector<Row>& rows) {
  std::string out = std::string(kHeader) + "\n";
  for (const auto& r : rows) out += to_line(r) + "\n";
  return out;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
  if (!f) throw Error("write failed for " + path);
}

inline void write(const std::string& path, const std::vector<Row>& rows) { write_file(path, to_text(rows)); }

/// Splits CSV text into records of fields (RFC 4180 quoting).
inline std::vector<std::vector<std::string>> split(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    char c = text[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      rec.push_back(std::move(field));
      field.clear();
      out.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ConfigError("unterminated quote in CSV");
  if (any) {
    rec.push_back(std::move(field));
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<Row> parse(const std::string& text) {
  auto recs = split(text);
  if (recs.empty()) throw ConfigError("empty CSV");
  std::string head;
  for (std::size_t k = 0; k < recs[0].size(); ++k) head += (k ? "," : "") + recs[0][k];
  if (head != kHeader) throw ConfigError("unexpected CSV header: " + head);
  std::vector<Row> rows;
  for (std::size_t k = 1; k < recs.size(); ++k) {
    const auto& f = recs[k];
    if (f.size() != 7) throw ConfigError("CSV record " + std::to_string(k) + " has " + std::to_string(f.size()) + " fields");
    rows.push_back({f[0], f[1], f[2], parse_double(f[3]), f[4], parse_double(f[5]), parse_double(f[6])});
  }
  return rows;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// One row per sweep point; every row carries the report's fitted slope and residual.
inline std::vector<Row> rows_from(const SweepReport& r, const std::string& params) {
  std::vector<Row> out;
  for (const auto& p : r.points)
    out.push_back({r.experiment, params, p.sweep_var, p.sweep_value,
                   p.skipped() ? (p.note.empty() ? std::string("skipped") : p.note) : format_double(p.measured),
                   r.fit.slope, r.fit.residual});
  return out;
}

/// Region raster: x coordinates then a 0/1 flag, every stride-th lattice point per axis.
inline std::string raster_text(const GridSpec& g, const std::vector<std::uint8_t>& indicator, int stride) {
  if (indicator.size() != g.size()) throw SizingError("indicator does not match grid");
  if (stride < 1) throw DomainError("raster stride must be >= 1");
  std::string out;
  for (int a = 0; a < g.dim(); ++a) out += "x" + std::to_string(a) + ",";
  out += "inside\n";
  std::vector<int> idx(g.dim(), 0);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    bool keep = true;
    for (int a = 0; a < g.dim(); ++a) keep = keep && idx[a] % stride == 0;
    if (keep) {
      for (int a = 0; a < g.dim(); ++a) out += format_double(g.coord(a, idx[a])) + ",";
      out += indicator[flat] ? "1\n" : "0\n";
    }
    for (int a = g.dim() - 1; a >= 0; --a) {
      if (++idx[a] < g.samples[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

}  // namespace pfio::csv
