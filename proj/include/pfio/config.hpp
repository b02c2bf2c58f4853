#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfio/error.hpp"
#include "pfio/estimate.hpp"
#include "pfio/fio.hpp"
#include "pfio/phase.hpp"
#include "pfio/symbol.hpp"

namespace pfio {

using json = nlohmann::json;

struct PhaseConfig {
  std::string kind = "half_wave";  // linear | translation | half_wave | perturbed
  int sign = 1;
  double epsilon = 0.05;
  double radius = 1.0;
  std::vector<double> shift;
};

struct SymbolConfig {
  std::string kind = "separable";  // separable | product_rho0 | cone_localized
  double m = -0.5;
  double rho = 0.0;
  std::optional<double> R = 1.4;  // empty: no cut in x
  double amplitude_power = 1.0;
  std::vector<double> orders;
  std::vector<double> axis;
  double aperture = 0.5;
};

struct OperatorConfig {
  bool low_cut = true;
  bool taper = true;
  double taper_plateau = 0.8;
};

struct DecompositionConfig {
  int t_max = -1;  // -1: from the grid Nyquist
  int s_max = -1;  // -1: from the grid spacing
  double C_R = 4.0;
  std::uint64_t seed = 17;
  int mc_samples = 20000;
};

struct ExperimentParams {
  std::vector<std::string> select;  // experiments of the subcommand to run; empty: all
  std::vector<int> js{2, 3, 4};
  std::vector<std::vector<int>> tuples;  // kernel-mass sweep; empty: diagonal tuples from js
  std::vector<double> deltas{0.25, 0.125};
  double tail_delta = 0.125;
  std::vector<double> fractions{0.25, 0.5};
  std::vector<double> p_list{4.0 / 3.0, 2.0, 4.0};
  std::vector<double> x_o;  // empty: origin
  std::vector<double> y;    // empty: origin
  int refinements = 1;
  std::vector<double> sharp_xi;    // empty: 2^{T_max - 1} e_1
  std::vector<double> sharp_step;  // empty: -e_1
  std::vector<double> sharp_r{1.0, 32.0};
  int sharp_count = 40;
  std::vector<double> flat_r{0.0625, 0.5};
  int flat_count = 12;
  std::vector<int> kernel_samples{512};
  std::vector<double> kernel_half_width{4.0};
  std::vector<double> kernel_r{0.03125, 0.25};
  EnsembleOptions ensemble;
  int verify_probes = 10000;
  int raster_stride = 0;  // 0: keep at most 256 points per axis
};

struct ExperimentConfig {
  std::vector<int> dims{2};
  std::vector<int> samples{128};
  std::vector<double> half_width{1.5};
  std::vector<PhaseConfig> phases{PhaseConfig{}};  // one per block after parsing
  SymbolConfig symbol;
  OperatorConfig op;
  DecompositionConfig decomposition;
  ExperimentParams experiment;
  std::uint64_t seed = 1;
  std::string output = "out";
};

struct ConfigResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> violations;
};

namespace detail {

struct Reader {
  std::vector<std::string> errors;
  bool explicit_factors = false;  // a factors list is never broadcast

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  bool object(const json& j, const std::string& path, const std::set<std::string>& keys) {
    if (!j.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!keys.count(it.key())) fail(path + "/" + it.key(), "unknown key");
    return true;
  }

  void number(const json& o, const char* key, const std::string& path, double& out) {
    if (!o.contains(key)) return;
    const auto& v = o.at(key);
    if (!v.is_number()) return fail(path + "/" + key, "expected a number");
    out = v.get<double>();
  }
  void integer(const json& o, const char* key, const std::string& path, int& out) {
    if (!o.contains(key)) return;
    const auto& v = o.at(key);
    if (!v.is_number_integer()) return fail(path + "/" + key, "expected an integer");
    out = v.get<int>();
  }
  void unsigned64(const json& o, const char* key, const std::string& path, std::uint64_t& out) {
    if (!o.contains(key)) return;
    const auto& v = o.at(key);
    if (!v.is_number_unsigned()) return fail(path + "/" + key, "expected a nonnegative integer");
    out = v.get<std::uint64_t>();
  }
  void boolean(const json& o, const char* key, const std::string& path, bool& out) {
    if (!o.contains(key)) return;
    const auto& v = o.at(key);
    if (!v.is_boolean()) return fail(path + "/" + key, "expected true or false");
    out = v.get<bool>();
  }
  void string(const json& o, const char* key, const std::string& path, std::string& out) {
    if (!o.contains(key)) return;
    const auto& v = o.at(key);
    if (!v.is_string()) return fail(path + "/" + key, "expected a string");
    out = v.get<std::string>();
  }
  // a number is accepted as a one-element list
  template <class T>
  void list(const json& o, const char* key, const std::string& path, std::vector<T>& out) {
    if (!o.contains(key)) return;
    const auto& v = o.at(key);
    auto ok = [](const json& e) {
      if constexpr (std::is_integral_v<T>) return e.is_number_integer();
      else return e.is_number();
    };
    if (ok(v)) {
      out = {v.get<T>()};
      return;
    }
    if (!v.is_array()) return fail(path + "/" + key, "expected a list of numbers");
    std::vector<T> tmp;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!ok(v[k])) return fail(path + "/" + key + "/" + std::to_string(k), "expected a number");
      tmp.push_back(v[k].get<T>());
    }
    out = std::move(tmp);
  }
};

inline void read_phase(Reader& rd, const json& j, const std::string& path, PhaseConfig& p) {
  if (!rd.object(j, path, {"kind", "sign", "epsilon", "radius", "shift"})) return;
  rd.string(j, "kind", path, p.kind);
  rd.integer(j, "sign", path, p.sign);
  rd.number(j, "epsilon", path, p.epsilon);
  rd.number(j, "radius", path, p.radius);
  rd.list(j, "shift", path, p.shift);
}

inline json phase_json(const PhaseConfig& p) {
  return json{{"kind", p.kind}, {"sign", p.sign}, {"epsilon", p.epsilon}, {"radius", p.radius}, {"shift", p.shift}};
}

inline std::vector<int> broadcast(const std::vector<int>& v, int n) { return v.size() == 1 ? std::vector<int>(n, v[0]) : v; }
inline std::vector<double> broadcast(const std::vector<double>& v, int n) {
  return v.size() == 1 ? std::vector<double>(n, v[0]) : v;
}

inline void validate(Reader& rd, ExperimentConfig& c) {
  int N = 0;
  bool dims_ok = !c.dims.empty();
  if (!dims_ok) rd.fail("/space/dims", "needs at least one block");
  for (int d : c.dims) {
    if (d < 1) {
      rd.fail("/space/dims", "block dimensions must be positive");
      dims_ok = false;
    }
    N += d;
  }
  if (N > kMaxDim) {
    rd.fail("/space/dims", "total dimension exceeds " + std::to_string(kMaxDim));
    dims_ok = false;
  }
  if (!dims_ok) return;
  const int n = static_cast<int>(c.dims.size());
  auto shape_len = [&](std::size_t len, const std::string& path, std::size_t want) {
    if (len != want) rd.fail(path, "has " + std::to_string(len) + " entries, expected " + std::to_string(want));
  };

  if (c.samples.size() == 1 || static_cast<int>(c.samples.size()) == N) c.samples = broadcast(c.samples, N);
  else shape_len(c.samples.size(), "/grid/samples", N);
  if (c.half_width.size() == 1 || static_cast<int>(c.half_width.size()) == N) c.half_width = broadcast(c.half_width, N);
  else shape_len(c.half_width.size(), "/grid/half_width", N);
  if (std::any_of(c.samples.begin(), c.samples.end(), [](int m) { return m < 8 || m % 2; }))
    rd.fail("/grid/samples", "sample counts must be even and >= 8");
  if (std::any_of(c.half_width.begin(), c.half_width.end(), [](double L) { return !(L > 0.0); }))
    rd.fail("/grid/half_width", "half-widths must be positive");

  if (c.phases.size() == 1 && n > 1 && !rd.explicit_factors) c.phases.assign(n, c.phases[0]);
  if (static_cast<int>(c.phases.size()) != n) shape_len(c.phases.size(), "/phase/factors", n);
  for (std::size_t i = 0; i < c.phases.size() && static_cast<int>(i) < n; ++i) {
    const auto& p = c.phases[i];
    std::string path = "/phase" + (n > 1 ? "/factors/" + std::to_string(i) : std::string());
    static const std::set<std::string> kinds{"linear", "translation", "half_wave", "perturbed"};
    if (!kinds.count(p.kind)) rd.fail(path + "/kind", "unknown phase kind '" + p.kind + "'");
    if (p.sign != 1 && p.sign != -1) rd.fail(path + "/sign", "sign must be +1 or -1");
    if (p.kind == "translation") shape_len(p.shift.size(), path + "/shift", c.dims[i]);
    if (p.kind == "perturbed") {
      if (!(p.epsilon > 0.0 && p.epsilon <= 0.1)) rd.fail(path + "/epsilon", "epsilon must lie in (0, 0.1]");
      if (!(p.radius > 0.0)) rd.fail(path + "/radius", "radius must be positive");
    }
  }

  auto& s = c.symbol;
  static const std::set<std::string> skinds{"separable", "product_rho0", "cone_localized"};
  if (!skinds.count(s.kind)) rd.fail("/symbol/kind", "unknown symbol kind '" + s.kind + "'");
  if (!(s.rho >= 0.0 && s.rho < 1.0)) rd.fail("/symbol/rho", "ρ ∈ [0,1) required");
  if (!(s.m <= 0.0)) rd.fail("/symbol/m", "m ≤ 0 per Theorem 1");
  if (s.R && !(*s.R > 0.0)) rd.fail("/symbol/R", "support radius must be positive (null for no cut)");
  if (!(s.amplitude_power > 0.0)) rd.fail("/symbol/amplitude_power", "must be positive");
  if (s.kind == "product_rho0") {
    shape_len(s.orders.size(), "/symbol/orders", n);
    for (double m : s.orders)
      if (!(m <= 0.0)) rd.fail("/symbol/orders", "m ≤ 0 per Theorem 1");
    if (s.rho != 0.0) rd.fail("/symbol/rho", "product_rho0 needs ρ = 0");
  }
  if (s.kind == "cone_localized") {
    shape_len(s.axis.size(), "/symbol/axis", N);
    double nrm = 0.0;
    for (double a : s.axis) nrm += a * a;
    if (s.axis.size() == static_cast<std::size_t>(N) && nrm == 0.0) rd.fail("/symbol/axis", "axis must be nonzero");
    if (!(s.aperture > 0.0 && s.aperture < 1.0)) rd.fail("/symbol/aperture", "aperture must lie in (0,1)");
  }

  if (!(c.op.taper_plateau > 0.0 && c.op.taper_plateau < 1.0))
    rd.fail("/operator/taper_plateau", "must lie in (0,1)");
  if (!(c.decomposition.C_R > 0.0)) rd.fail("/decomposition/C_R", "must be positive");
  if (c.decomposition.mc_samples < 0) rd.fail("/decomposition/mc_samples", "must be >= 0");

  auto& e = c.experiment;
  for (int j : e.js)
    if (j < 1) rd.fail("/experiment/js", "levels must be >= 1");
  for (std::size_t k = 0; k < e.tuples.size(); ++k) {
    shape_len(e.tuples[k].size(), "/experiment/tuples/" + std::to_string(k), n);
    for (int t : e.tuples[k])
      if (t < 1) rd.fail("/experiment/tuples/" + std::to_string(k), "entries must be >= 1");
  }
  for (double d : e.deltas)
    if (!(d > 0.0 && d < 1.0)) rd.fail("/experiment/deltas", "radii must lie in (0,1)");
  if (!(e.tail_delta > 0.0 && e.tail_delta < 1.0)) rd.fail("/experiment/tail_delta", "must lie in (0,1)");
  for (double f : e.fractions)
    if (!(f > 0.0 && f <= 1.0)) rd.fail("/experiment/fractions", "must lie in (0,1]");
  for (double p : e.p_list)
    if (!(p >= 1.0)) rd.fail("/experiment/p_list", "exponents must be >= 1");
  for (auto [v, name] : {std::pair{&e.x_o, "x_o"}, std::pair{&e.y, "y"}, std::pair{&e.sharp_xi, "sharp_xi"},
                         std::pair{&e.sharp_step, "sharp_step"}})
    if (!v->empty()) shape_len(v->size(), std::string("/experiment/") + name, N);
  if (e.refinements < 0 || e.refinements > 3) rd.fail("/experiment/refinements", "must lie in [0,3]");
  for (auto [v, name] : {std::pair{&e.sharp_r, "sharp_r"}, std::pair{&e.flat_r, "flat_r"},
                         std::pair{&e.kernel_r, "kernel_r"}}) {
    if (v->size() != 2 || !((*v)[0] > 0.0 && (*v)[1] > (*v)[0]))
      rd.fail(std::string("/experiment/") + name, "needs [lo, hi] with 0 < lo < hi");
  }
  if (e.sharp_count < 2) rd.fail("/experiment/sharp_count", "must be >= 2");
  if (e.flat_count < 2) rd.fail("/experiment/flat_count", "must be >= 2");
  if (e.kernel_samples.size() == 1 || static_cast<int>(e.kernel_samples.size()) == N)
    e.kernel_samples = broadcast(e.kernel_samples, N);
  else shape_len(e.kernel_samples.size(), "/experiment/kernel_grid/samples", N);
  if (e.kernel_half_width.size() == 1 || static_cast<int>(e.kernel_half_width.size()) == N)
    e.kernel_half_width = broadcast(e.kernel_half_width, N);
  else shape_len(e.kernel_half_width.size(), "/experiment/kernel_grid/half_width", N);
  if (std::any_of(e.kernel_samples.begin(), e.kernel_samples.end(), [](int m) { return m < 8 || m % 2; }))
    rd.fail("/experiment/kernel_grid/samples", "sample counts must be even and >= 8");
  if (std::any_of(e.kernel_half_width.begin(), e.kernel_half_width.end(), [](double L) { return !(L > 0.0); }))
    rd.fail("/experiment/kernel_grid/half_width", "half-widths must be positive");
  if (e.ensemble.atoms < 0 || e.ensemble.bumps < 0 || e.ensemble.random_fields < 0)
    rd.fail("/experiment/ensemble", "counts must be >= 0");
  if (e.verify_probes < 1) rd.fail("/experiment/verify_probes", "must be >= 1");
  if (e.raster_stride < 0) rd.fail("/experiment/raster_stride", "must be >= 0");
}

}  // namespace detail

/// Strict parse: unknown keys and every range or shape problem are collected.
inline ConfigResult parse_config_json(const json& j) {
  detail::Reader rd;
  ExperimentConfig c;
  const std::string root;
  if (!rd.object(j, "", {"space", "grid", "phase", "symbol", "operator", "decomposition", "experiment", "seed",
                         "output"}))
    return {std::nullopt, rd.errors};
  if (j.contains("space") && rd.object(j["space"], "/space", {"dims", "n"})) {
    rd.list(j["space"], "dims", "/space", c.dims);
    if (j["space"].contains("n")) {
      int n = -1;
      rd.integer(j["space"], "n", "/space", n);
      if (n >= 0 && n != static_cast<int>(c.dims.size())) rd.fail("/space/n", "does not match the length of dims");
    }
  }
  if (j.contains("grid") && rd.object(j["grid"], "/grid", {"samples", "half_width"})) {
    rd.list(j["grid"], "samples", "/grid", c.samples);
    rd.list(j["grid"], "half_width", "/grid", c.half_width);
  }
  if (j.contains("phase")) {
    const auto& p = j["phase"];
    if (p.is_object() && p.contains("factors")) {
      if (rd.object(p, "/phase", {"factors"})) {
        if (!p["factors"].is_array()) {
          rd.fail("/phase/factors", "expected a list of phase objects");
        } else {
          c.phases.clear();
          rd.explicit_factors = true;
          for (std::size_t k = 0; k < p["factors"].size(); ++k) {
            PhaseConfig pc;
            detail::read_phase(rd, p["factors"][k], "/phase/factors/" + std::to_string(k), pc);
            c.phases.push_back(pc);
          }
        }
      }
    } else {
      PhaseConfig pc;
      detail::read_phase(rd, p, "/phase", pc);
      c.phases = {pc};
    }
  }
  if (j.contains("symbol")) {
    const auto& s = j["symbol"];
    if (rd.object(s, "/symbol", {"kind", "m", "rho", "R", "amplitude_power", "orders", "axis", "aperture"})) {
      rd.string(s, "kind", "/symbol", c.symbol.kind);
      rd.number(s, "m", "/symbol", c.symbol.m);
      rd.number(s, "rho", "/symbol", c.symbol.rho);
      if (s.contains("R")) {
        if (s["R"].is_null()) c.symbol.R.reset();
        else if (s["R"].is_number()) c.symbol.R = s["R"].get<double>();
        else rd.fail("/symbol/R", "expected a number or null");
      }
      rd.number(s, "amplitude_power", "/symbol", c.symbol.amplitude_power);
      rd.list(s, "orders", "/symbol", c.symbol.orders);
      rd.list(s, "axis", "/symbol", c.symbol.axis);
      rd.number(s, "aperture", "/symbol", c.symbol.aperture);
    }
  }
  if (j.contains("operator") && rd.object(j["operator"], "/operator", {"low_cut", "taper", "taper_plateau"})) {
    rd.boolean(j["operator"], "low_cut", "/operator", c.op.low_cut);
    rd.boolean(j["operator"], "taper", "/operator", c.op.taper);
    rd.number(j["operator"], "taper_plateau", "/operator", c.op.taper_plateau);
  }
  if (j.contains("decomposition") &&
      rd.object(j["decomposition"], "/decomposition", {"t_max", "s_max", "C_R", "seed", "mc_samples"})) {
    const auto& d = j["decomposition"];
    rd.integer(d, "t_max", "/decomposition", c.decomposition.t_max);
    rd.integer(d, "s_max", "/decomposition", c.decomposition.s_max);
    rd.number(d, "C_R", "/decomposition", c.decomposition.C_R);
    rd.unsigned64(d, "seed", "/decomposition", c.decomposition.seed);
    rd.integer(d, "mc_samples", "/decomposition", c.decomposition.mc_samples);
  }
  if (j.contains("experiment")) {
    const auto& e = j["experiment"];
    auto& x = c.experiment;
    const std::string P = "/experiment";
    if (rd.object(e, P,
                  {"select", "js", "tuples", "deltas", "tail_delta", "fractions", "p_list", "x_o", "y", "refinements",
                   "sharp_xi", "sharp_step", "sharp_r", "sharp_count", "flat_r", "flat_count", "kernel_grid",
                   "kernel_r", "ensemble", "verify_probes", "raster_stride"})) {
      if (e.contains("select")) {
        const auto& v = e["select"];
        if (!v.is_array()) {
          rd.fail(P + "/select", "expected a list of experiment names");
        } else {
          x.select.clear();
          for (std::size_t k = 0; k < v.size(); ++k) {
            if (v[k].is_string()) x.select.push_back(v[k].get<std::string>());
            else rd.fail(P + "/select/" + std::to_string(k), "expected a string");
          }
        }
      }
      rd.list(e, "js", P, x.js);
      if (e.contains("tuples")) {
        if (!e["tuples"].is_array()) {
          rd.fail(P + "/tuples", "expected a list of integer lists");
        } else {
          x.tuples.clear();
          for (std::size_t k = 0; k < e["tuples"].size(); ++k) {
            std::vector<int> t;
            json wrap = {{"t", e["tuples"][k]}};
            rd.list(wrap, "t", P + "/tuples/" + std::to_string(k), t);
            x.tuples.push_back(t);
          }
        }
      }
      rd.list(e, "deltas", P, x.deltas);
      rd.number(e, "tail_delta", P, x.tail_delta);
      rd.list(e, "fractions", P, x.fractions);
      rd.list(e, "p_list", P, x.p_list);
      rd.list(e, "x_o", P, x.x_o);
      rd.list(e, "y", P, x.y);
      rd.integer(e, "refinements", P, x.refinements);
      rd.list(e, "sharp_xi", P, x.sharp_xi);
      rd.list(e, "sharp_step", P, x.sharp_step);
      rd.list(e, "sharp_r", P, x.sharp_r);
      rd.integer(e, "sharp_count", P, x.sharp_count);
      rd.list(e, "flat_r", P, x.flat_r);
      rd.integer(e, "flat_count", P, x.flat_count);
      if (e.contains("kernel_grid") && rd.object(e["kernel_grid"], P + "/kernel_grid", {"samples", "half_width"})) {
        rd.list(e["kernel_grid"], "samples", P + "/kernel_grid", x.kernel_samples);
        rd.list(e["kernel_grid"], "half_width", P + "/kernel_grid", x.kernel_half_width);
      }
      rd.list(e, "kernel_r", P, x.kernel_r);
      if (e.contains("ensemble") &&
          rd.object(e["ensemble"], P + "/ensemble",
                    {"atoms", "bumps", "random_fields", "atom_radii", "center_spread", "band", "seed"})) {
        const auto& en = e["ensemble"];
        const std::string Q = P + "/ensemble";
        rd.integer(en, "atoms", Q, x.ensemble.atoms);
        rd.integer(en, "bumps", Q, x.ensemble.bumps);
        rd.integer(en, "random_fields", Q, x.ensemble.random_fields);
        rd.list(en, "atom_radii", Q, x.ensemble.atom_radii);
        rd.number(en, "center_spread", Q, x.ensemble.center_spread);
        rd.number(en, "band", Q, x.ensemble.band);
        rd.unsigned64(en, "seed", Q, x.ensemble.seed);
      }
      rd.integer(e, "verify_probes", P, x.verify_probes);
      rd.integer(e, "raster_stride", P, x.raster_stride);
    }
  }
  rd.unsigned64(j, "seed", "", c.seed);
  rd.string(j, "output", "", c.output);
  detail::validate(rd, c);
  if (!rd.errors.empty()) return {std::nullopt, rd.errors};
  return {c, {}};
}

inline ConfigResult parse_config_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    return {std::nullopt, {std::string("parse error: ") + e.what()}};
  }
  return parse_config_json(j);
}

inline ConfigResult parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) return {std::nullopt, {path + ": cannot open"}};
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_string(ss.str());
}

/// Full normalized form, defaults filled in; parse_config_json(to_json(c)) reproduces c.
inline json to_json(const ExperimentConfig& c) {
  json phase;
  if (c.phases.size() == 1) {
    phase = detail::phase_json(c.phases[0]);
  } else {
    phase["factors"] = json::array();
    for (const auto& p : c.phases) phase["factors"].push_back(detail::phase_json(p));
  }
  const auto& s = c.symbol;
  const auto& e = c.experiment;
  return json{
      {"space", {{"dims", c.dims}}},
      {"grid", {{"samples", c.samples}, {"half_width", c.half_width}}},
      {"phase", phase},
      {"symbol",
       {{"kind", s.kind},
        {"m", s.m},
        {"rho", s.rho},
        {"R", s.R ? json(*s.R) : json(nullptr)},
        {"amplitude_power", s.amplitude_power},
        {"orders", s.orders},
        {"axis", s.axis},
        {"aperture", s.aperture}}},
      {"operator", {{"low_cut", c.op.low_cut}, {"taper", c.op.taper}, {"taper_plateau", c.op.taper_plateau}}},
      {"decomposition",
       {{"t_max", c.decomposition.t_max},
        {"s_max", c.decomposition.s_max},
        {"C_R", c.decomposition.C_R},
        {"seed", c.decomposition.seed},
        {"mc_samples", c.decomposition.mc_samples}}},
      {"experiment",
       {{"select", e.select},
        {"js", e.js},
        {"tuples", e.tuples},
        {"deltas", e.deltas},
        {"tail_delta", e.tail_delta},
        {"fractions", e.fractions},
        {"p_list", e.p_list},
        {"x_o", e.x_o},
        {"y", e.y},
        {"refinements", e.refinements},
        {"sharp_xi", e.sharp_xi},
        {"sharp_step", e.sharp_step},
        {"sharp_r", e.sharp_r},
        {"sharp_count", e.sharp_count},
        {"flat_r", e.flat_r},
        {"flat_count", e.flat_count},
        {"kernel_grid", {{"samples", e.kernel_samples}, {"half_width", e.kernel_half_width}}},
        {"kernel_r", e.kernel_r},
        {"ensemble",
         {{"atoms", e.ensemble.atoms},
          {"bumps", e.ensemble.bumps},
          {"random_fields", e.ensemble.random_fields},
          {"atom_radii", e.ensemble.atom_radii},
          {"center_spread", e.ensemble.center_spread},
          {"band", e.ensemble.band},
          {"seed", e.ensemble.seed}}},
        {"verify_probes", e.verify_probes},
        {"raster_stride", e.raster_stride}}},
      {"seed", c.seed},
      {"output", c.output}};
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline ProductSpaceShape config_shape(const ExperimentConfig& c) { return ProductSpaceShape::make(c.dims); }

inline PhaseFactor build_phase_factor(const PhaseConfig& p, int dim) {
  if (p.kind == "linear") return phases::linear(dim);
  if (p.kind == "translation") {
    Vec a(dim);
    for (int k = 0; k < dim; ++k) a[k] = p.shift.at(k);
    return phases::translation(a);
  }
  if (p.kind == "half_wave") return phases::half_wave(dim, p.sign);
  if (p.kind == "perturbed") return phases::perturbed(dim, p.epsilon, p.radius);
  throw ConfigError("unknown phase kind '" + p.kind + "'");
}

inline ProductPhase build_phase(const ExperimentConfig& c) {
  std::vector<PhaseFactor> fs;
  for (std::size_t i = 0; i < c.dims.size(); ++i) fs.push_back(build_phase_factor(c.phases.at(i), c.dims[i]));
  return ProductPhase::make(std::move(fs));
}

inline SymbolSpec build_symbol(const ExperimentConfig& c) {
  const auto shape = config_shape(c);
  const auto& s = c.symbol;
  const double R = s.R ? *s.R : std::numeric_limits<double>::infinity();
  if (s.kind == "product_rho0") return symbols::product_rho0(shape, s.orders, R);
  SymbolSpec base = symbols::separable(shape, s.m, R, s.rho, s.amplitude_power);
  if (s.kind == "cone_localized") {
    Vec axis(shape.total_dim());
    for (int k = 0; k < shape.total_dim(); ++k) axis[k] = s.axis.at(k);
    return symbols::cone_localized(base, axis, s.aperture);
  }
  return base;
}

inline GridSpec build_grid(const ExperimentConfig& c) { return make_grid(config_shape(c), c.samples, c.half_width); }

inline FioSpec build_spec(const ExperimentConfig& c) {
  FioSpec s;
  s.phase = build_phase(c);
  s.symbol = build_symbol(c);
  s.grid = build_grid(c);
  s.low_cut = c.op.low_cut;
  s.taper = c.op.taper;
  s.taper_plateau = c.op.taper_plateau;
  return s;
}

inline Vec config_point(const std::vector<double>& v, int N) {
  Vec p = Vec::Zero(N);
  for (int k = 0; k < N && k < static_cast<int>(v.size()); ++k) p[k] = v[k];
  return p;
}

}  // namespace pfio
