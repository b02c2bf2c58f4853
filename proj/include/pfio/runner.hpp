#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>
#include <fftw3.h>
#include <json.hpp>

#include "pfio/angular.hpp"
#include "pfio/config.hpp"
#include "pfio/csv.hpp"
#include "pfio/error.hpp"
#include "pfio/estimate.hpp"
#include "pfio/fio.hpp"
#include "pfio/littlewood_paley.hpp"
#include "pfio/mollifier.hpp"
#include "pfio/phase.hpp"
#include "pfio/symbol.hpp"

namespace pfio {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"verify", "kernel-decay", "l2", "atoms", "sharpness", "roi", "pdo"};
  return s;
}

struct JobResult {
  std::vector<csv::Row> rows;
  bool pass = true;
  std::string note;
  std::map<std::string, std::string> extra_files;  // file name -> contents
};

struct Job {
  std::string name;  // CSV stem
  std::function<JobResult()> run;
};

struct JobOutcome {
  std::string name;
  std::string file;
  bool pass = false;
  std::string note;
  std::vector<std::string> extra_files;
};

struct RunOptions {
  std::string out_dir;  // empty: the config's output field
  int jobs = 1;
};

struct RunSummary {
  int exit_code = 0;
  std::vector<JobOutcome> outcomes;
  std::string manifest_path;
};

namespace runner_detail {

struct Ctx {
  ExperimentConfig cfg;
  FioSpec spec;
  std::string params;
  int N = 0;
  int n = 0;

  csv::Row row(const std::string& exp, const std::string& var, double value, double measured,
               double slope = std::numeric_limits<double>::quiet_NaN(),
               double residual = std::numeric_limits<double>::quiet_NaN()) const {
    return {exp, params, var, value, csv::format_double(measured), slope, residual};
  }
  csv::Row note_row(const std::string& exp, const std::string& var, double value, const std::string& note) const {
    return {exp, params, var, value, note, std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::quiet_NaN()};
  }
  int t_max() const { return cfg.decomposition.t_max > 0 ? cfg.decomposition.t_max : tmax_for_grid(spec.grid); }
  RegionOptions region() const {
    RegionOptions o;
    o.C_R = cfg.decomposition.C_R;
    o.s_max = cfg.decomposition.s_max;
    o.mc_samples = static_cast<std::size_t>(cfg.decomposition.mc_samples);
    o.seed = cfg.decomposition.seed;
    return o;
  }
  Vec x_o() const { return config_point(cfg.experiment.x_o, N); }
  Vec y() const { return config_point(cfg.experiment.y, N); }
};

inline std::vector<double> log_space_probes(std::mt19937_64& rng, int count, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log2(lo), std::log2(hi));
  std::vector<double> r(count);
  for (auto& v : r) v = std::exp2(u(rng));
  return r;
}

inline Vec random_block_point(std::mt19937_64& rng, const ProductSpaceShape& shape, double max_norm) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec xi(shape.total_dim());
  for (int i = 0; i < shape.blocks(); ++i) {
    Vec d(shape.dim(i));
    for (int k = 0; k < shape.dim(i); ++k) d[k] = g(rng);
    d /= d.norm();
    double r = max_norm * u(rng);
    for (int k = 0; k < shape.dim(i); ++k) xi[shape.offset(i) + k] = r * d[k];
  }
  return xi;
}

inline SampledField white_noise(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  SampledField f{g, Domain::physical, std::vector<Complex>(g.size())};
  for (auto& z : f.values) z = Complex(d(rng), d(rng));
  return f;
}

inline JobResult from_sweep(const Ctx& c, const SweepReport& r) {
  JobResult out;
  out.rows = csv::rows_from(r, c.params);
  out.pass = r.pass;
  out.note = r.note;
  return out;
}

// ---- verify ----

inline JobResult job_telescoping(const Ctx& c) {
  JobResult out;
  std::mt19937_64 rng(c.cfg.seed);
  auto rs = log_space_probes(rng, c.cfg.experiment.verify_probes, 1e-3, 1e6);
  const int T = c.t_max();
  for (int K = 1; K <= T; ++K) {
    double err = 0.0;
    for (double r : rs) {
      double s = psi0(r);
      for (int k = 1; k <= K; ++k) s += bump_phi(std::exp2(-k) * r);
      err = std::max(err, std::abs(s - psi0(std::exp2(-K) * r)));
    }
    out.rows.push_back(c.row("decomposition_telescoping", "K", K, err));
    out.pass = out.pass && err <= 1e-12;
  }
  return out;
}

inline JobResult job_reconstruction(const Ctx& c) {
  JobResult out;
  const auto& shape = c.spec.grid.shape;
  const double rho = c.cfg.symbol.rho;
  std::mt19937_64 rng(c.cfg.seed + 1);
  for (int T = 2; T <= c.t_max(); ++T) {
    auto tuples = enumerate_tuples(c.n, T, rho);
    double err = 0.0;
    for (int k = 0; k < c.cfg.experiment.verify_probes; ++k) {
      Vec xi = random_block_point(rng, shape, std::exp2(T - 1));
      double rem = low_frequency_remainder(tuples, shape, xi);
      double sum = 0.0;
      for (const auto& tp : tuples) sum += delta_t(tp, shape, xi);
      double e = std::abs(sum + rem - 1.0);
      if (rho == 0.0) {
        double prod = 1.0;
        for (int i = 0; i < c.n; ++i) {
          double r = shape.block(xi, i).norm();
          prod *= psi0(std::exp2(-T) * r) - psi0(r);
        }
        e = std::max(e, std::abs(rem - (1.0 - prod)));
      }
      err = std::max(err, e);
    }
    out.rows.push_back(c.row("decomposition_reconstruction", "T_max", T, err));
    out.pass = out.pass && err <= 1e-9;
  }
  return out;
}

inline JobResult job_split_construction(const Ctx& c) {
  JobResult out;
  for (int q : {2, 3, 4}) {
    for (int n = 1; n <= 4; ++n) {
      std::size_t cases = 0, bad = 0;
      for (const auto& tp : enumerate_tuples(n, 16, 1.0 / q)) {
        ++cases;
        if (!partition_conditions_hold(tp, partition_index_sets(tp))) ++bad;
      }
      out.rows.push_back(c.row("decomposition_partition", "n(q=" + std::to_string(q) + ")", n,
                               static_cast<double>(bad)));
      out.pass = out.pass && bad == 0 && cases > 0;
    }
  }
  return out;
}

inline JobResult job_sphere_partition(const Ctx& c) {
  JobResult out;
  std::set<int> dims;
  for (int d : c.cfg.dims)
    if (d >= 2) dims.insert(d);
  if (dims.empty()) dims.insert(2);
  std::mt19937_64 rng(c.cfg.seed + 2);
  for (int d : dims) {
    std::vector<Vec> probes;
    for (int k = 0; k < std::min(c.cfg.experiment.verify_probes, 2000); ++k) {
      ProductSpaceShape one = ProductSpaceShape::make({d});
      probes.push_back(random_block_point(rng, one, 1.0));
    }
    for (int s = 2; s <= 8; s += 2) {
      double dev = partition_check(build_net(d, s), probes);
      out.rows.push_back(c.row("cutoffs_sphere_partition", "s(N_i=" + std::to_string(d) + ")", s, dev));
      out.pass = out.pass && dev <= 1e-10;
    }
  }
  return out;
}

inline JobResult job_axis_cutoff(const Ctx& c) {
  JobResult out;
  const auto& shape = c.spec.grid.shape;
  std::mt19937_64 rng(c.cfg.seed + 3);
  std::size_t bad = 0;
  const int P = c.cfg.experiment.verify_probes;
  for (int k = 0; k < P; ++k) {
    Vec xi = random_block_point(rng, shape, 2.0);
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < c.n; ++i) lo = std::min(lo, shape.block(xi, i).norm());
    double v = axis_cutoff(shape, xi);
    if (v < -1e-15 || v > 1.0 + 1e-15) ++bad;
    if (lo <= 0.5 && std::abs(v - 1.0) > 1e-15) ++bad;
    if (lo >= 1.0 && v != 0.0) ++bad;
  }
  out.rows.push_back(c.row("cutoffs_axis", "probes", P, static_cast<double>(bad)));
  out.pass = bad == 0;
  return out;
}

inline JobResult job_phases(const Ctx& c) {
  JobResult out;
  const auto& ph = c.spec.phase;
  std::mt19937_64 rng(c.cfg.seed + 4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < ph.blocks(); ++i) {
    const auto& f = ph.factors[i];
    auto h = check_homogeneity(f, 200, {0.5, 2.0, 7.0}, 1e-9, c.cfg.seed);
    out.rows.push_back(c.row("phases_homogeneity", "block", i, std::max(h.max_eval_violation, h.max_grad_violation)));
    std::vector<Vec> xs;
    for (int k = 0; k < 16; ++k) {
      Vec x(f.dim);
      for (int a = 0; a < f.dim; ++a) x[a] = u(rng);
      xs.push_back(x);
    }
    auto nd = check_nondegeneracy(f, xs, direction_net(f.dim, 16));
    out.rows.push_back(c.row("phases_nondegeneracy", "block", i, nd.min_abs_det));
    out.pass = out.pass && h.pass && nd.pass;
  }
  return out;
}

inline JobResult job_symbols(const Ctx& c) {
  JobResult out;
  ProbeOptions opt;
  opt.seed = c.cfg.seed;
  auto rep = verify_class_membership(c.spec.symbol, 2, opt);
  for (std::size_t k = 0; k < rep.entries.size(); ++k)
    out.rows.push_back(c.row("symbols_class", "entry", static_cast<double>(k), rep.entries[k].sup_ratio));
  out.pass = rep.pass;
  out.note = "max ratio " + csv::format_double(rep.max_ratio);
  return out;
}

inline JobResult job_transform(const Ctx& c) {
  JobResult out;
  const auto& g = c.spec.grid;
  const bool fast = uses_fast_path(c.spec);
  const int fields = fast ? 20 : 2;
  double worst = 0.0;
  for (int k = 0; k < fields; ++k) {
    SampledField f = white_noise(g, c.cfg.seed * 1000 + 2 * k);
    SampledField h = white_noise(g, c.cfg.seed * 1000 + 2 * k + 1);
    SampledField fh = forward_transform(f);
    double plan = std::abs(lp_norm(fh, 2.0) - lp_norm(f, 2.0)) / lp_norm(f, 2.0);
    SampledField Ff = apply_fio(c.spec, f);
    SampledField Fh = apply_adjoint(c.spec, h);
    Complex lhs = inner_product(Ff, h), rhs = inner_product(f, Fh);
    double adj = std::abs(lhs - rhs) / std::max(lp_norm(Ff, 2.0) * lp_norm(h, 2.0), 1e-300);
    out.rows.push_back(c.row("transform_plancherel", "field", k, plan));
    out.rows.push_back(c.row("transform_adjoint", "field", k, adj));
    worst = std::max({worst, plan, adj});
  }
  FioSpec id;
  const auto shape = g.shape;
  id.phase = ProductPhase::uniform(shape, [](int d) { return phases::linear(d); });
  id.symbol = symbols::separable(shape, 0.0, std::numeric_limits<double>::infinity());
  id.grid = g;
  id.low_cut = false;
  id.taper = false;
  SampledField f = white_noise(g, c.cfg.seed * 1000 + 999);
  SampledField If = apply_fio(id, f);
  double diff = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) diff = std::max(diff, std::abs(If.values[k] - f.values[k]));
  double rel = diff / lp_norm(f, std::numeric_limits<double>::infinity());
  out.rows.push_back(c.row("transform_identity", "field", 0, rel));
  worst = std::max(worst, rel);
  out.pass = worst <= 1e-8;
  return out;
}

// ---- kernel-decay ----

inline std::vector<DyadicTuple> mass_tuples(const Ctx& c) {
  std::vector<DyadicTuple> out;
  if (!c.cfg.experiment.tuples.empty()) {
    for (const auto& t : c.cfg.experiment.tuples) out.push_back(DyadicTuple::make(t, c.cfg.symbol.rho));
  } else {
    for (int j : c.cfg.experiment.js) out.push_back(DyadicTuple::make(std::vector<int>(c.n, j), c.cfg.symbol.rho));
  }
  return out;
}

// ---- atoms ----

inline JobResult job_atom_image(const Ctx& c, Orientation o) {
  JobResult out;
  const std::string name = std::string("atom_") + to_string(o);
  std::vector<double> totals, lx, ly;
  for (double d : c.cfg.experiment.deltas) {
    Atom a = make_atom(c.spec.grid, c.x_o(), d);
    AtomImage img = atom_image_bound(c.spec, a, o, c.region());
    totals.push_back(img.total);
    lx.push_back(std::log2(d));
    ly.push_back(std::log2(img.total));
  }
  DecayFitReport fit = fit_line(lx, ly, "log2 total vs log2 delta");
  for (std::size_t k = 0; k < totals.size(); ++k)
    out.rows.push_back(c.row(name, "delta", c.cfg.experiment.deltas[k], totals[k], fit.slope, fit.residual));
  out.pass = max_over_min(totals) <= 4.0;
  out.note = "max/min " + csv::format_double(max_over_min(totals));
  return out;
}

inline JobResult job_atom_ablation(const Ctx& c) {
  JobResult out;
  for (Orientation o : {Orientation::forward, Orientation::dual}) {
    for (double d : c.cfg.experiment.deltas) {
      Atom a = make_atom(c.spec.grid, c.x_o(), d);
      auto r = cancellation_ablation(c.spec, a, o);
      out.rows.push_back(c.row("atom_ablation", std::string("delta(") + to_string(o) + ")", d, r.ratio));
      out.pass = out.pass && r.ratio > 1.0;
    }
  }
  return out;
}

// ---- roi ----

inline JobResult job_roi(const Ctx& c) {
  JobResult out;
  const auto& g = c.spec.grid;
  int stride = c.cfg.experiment.raster_stride;
  if (stride == 0) {
    int mx = *std::max_element(g.samples.begin(), g.samples.end());
    stride = std::max(1, (mx + 255) / 256);
  }
  int k = 0;
  for (double d : c.cfg.experiment.deltas) {
    for (Orientation o : {Orientation::forward, Orientation::dual}) {
      InfluenceRegion reg = region_of_influence(g, c.spec.phase, c.x_o(), d, o, c.region());
      const std::string tag = std::string("(") + to_string(o) + ")";
      out.rows.push_back(c.row("roi_measure", "delta" + tag, d, reg.grid_measure(g)));
      if (reg.mc_samples > 0) out.rows.push_back(c.row("roi_measure_mc", "delta" + tag, d, reg.mc_measure));
      out.pass = out.pass && reg.grid_measure(g) > 0.0;
      out.extra_files["roi_raster_" + std::string(to_string(o)) + "_" + std::to_string(k) + ".csv"] =
          csv::raster_text(g, reg.indicator, stride);
    }
    ++k;
  }
  return out;
}

inline JobResult job_sharpness(const Ctx& c) {
  JobResult out;
  auto reps = sharpness_experiment(c.spec, c.cfg.experiment.p_list, c.cfg.experiment.js);
  for (const auto& r : reps) {
    for (const auto& p : r.sweep.points)
      out.rows.push_back(c.row("sharpness", "j(p=" + csv::format_double(r.p) + ")", p.sweep_value, p.measured,
                               r.sweep.fit.slope, r.sweep.fit.residual));
    out.pass = out.pass && r.sweep.pass;
  }
  return out;
}

inline JobResult job_pdo(const Ctx& c) {
  JobResult out;
  PdoSetup setup{c.spec.phase, c.spec.symbol, c.cfg.samples, c.cfg.half_width, c.cfg.experiment.refinements,
                 c.cfg.experiment.ensemble};
  PdoReport r = pdo_case_experiment(setup, c.cfg.experiment.p_list);
  for (std::size_t k = 0; k < r.ps.size(); ++k)
    for (std::size_t l = 0; l < r.norms[k].size(); ++l)
      out.rows.push_back(c.row("pdo_norm", "level(p=" + csv::format_double(r.ps[k]) + ")", static_cast<double>(l),
                               r.norms[k][l]));
  out.pass = r.pass;
  return out;
}

inline JobResult job_l2_norm(const Ctx& c) {
  JobResult out;
  NormEstimate est = empirical_operator_norm(c.spec, 2.0, c.cfg.experiment.ensemble);
  for (std::size_t k = 0; k < est.probe_ratios.size(); ++k)
    out.rows.push_back(c.row("l2_norm_probes", "probe", static_cast<double>(k), est.probe_ratios[k]));
  out.rows.push_back(c.row("l2_norm", "iterations", est.iterations, est.value));
  double best = est.probe_ratios.empty() ? 0.0 : *std::max_element(est.probe_ratios.begin(), est.probe_ratios.end());
  out.pass = est.value >= best * (1.0 - 1e-12);
  return out;
}

inline JobResult job_fractional(const Ctx& c) {
  JobResult out;
  FractionalReport r = fractional_mapping_experiment(c.spec, c.cfg.experiment.deltas, c.x_o());
  for (const auto* s : {&r.to_l2, &r.from_l2}) {
    auto rows = csv::rows_from(*s, c.params);
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  }
  out.pass = r.pass;
  return out;
}

inline JobResult job_multiplier_kernel(const Ctx& c) {
  JobResult out;
  const auto& e = c.cfg.experiment;
  GridSpec kg = make_grid(c.spec.grid.shape, e.kernel_samples, e.kernel_half_width);
  DecayFitReport fit = multiplier_kernel_decay(kg, c.cfg.symbol.m, e.kernel_r[0], e.kernel_r[1], c.cfg.op.taper_plateau);
  for (std::size_t k = 0; k < fit.abscissae.size(); ++k)
    out.rows.push_back(c.row("multiplier_kernel", "log2 r", fit.abscissae[k], std::exp2(fit.ordinates[k]), fit.slope, fit.residual));
  out.pass = fit.pass;
  return out;
}

inline std::vector<Job> build_jobs(const std::shared_ptr<const Ctx>& cp, const std::string& sub) {
  const Ctx& c = *cp;
  std::vector<Job> jobs;
  auto add = [&](std::string name, std::function<JobResult(const Ctx&)> f) {
    jobs.push_back({std::move(name), [cp, f] { return f(*cp); }});
  };
  const auto& e = c.cfg.experiment;
  if (sub == "verify") {
    add("decomposition_telescoping", job_telescoping);
    add("decomposition_reconstruction", job_reconstruction);
    add("decomposition_partition", job_split_construction);
    add("cutoffs_sphere_partition", job_sphere_partition);
    add("cutoffs_axis", job_axis_cutoff);
    add("phases", job_phases);
    add("symbols_class", job_symbols);
    add("transform", job_transform);
  } else if (sub == "kernel-decay") {
    add("kernel_mass", [](const Ctx& c) { return from_sweep(c, verify_kernel_mass(c.spec, mass_tuples(c), c.y())); });
    add("kernel_lipschitz", [](const Ctx& c) {
      return from_sweep(c, verify_kernel_lipschitz(c.spec, c.cfg.experiment.js, c.y(), c.cfg.experiment.fractions));
    });
    add("kernel_tail", [](const Ctx& c) {
      return from_sweep(c, verify_tail_bound(c.spec, c.cfg.experiment.js, c.cfg.experiment.tail_delta, c.x_o(), c.y(),
                                             c.region()));
    });
  } else if (sub == "l2") {
    add("omega_sharp", [](const Ctx& c) {
      const auto& e = c.cfg.experiment;
      Vec xi = e.sharp_xi.empty() ? Vec(std::exp2(c.t_max() - 1) * detail::unit_axis(c.N, 0))
                                  : config_point(e.sharp_xi, c.N);
      Vec step = e.sharp_step.empty() ? Vec(-detail::unit_axis(c.N, 0)) : config_point(e.sharp_step, c.N);
      return from_sweep(c, omega_sharp_decay(c.spec, xi, step, e.sharp_r[0], e.sharp_r[1], e.sharp_count));
    });
    add("omega_flat", [](const Ctx& c) {
      const auto& e = c.cfg.experiment;
      return from_sweep(c, omega_flat_decay(c.spec, c.x_o(), e.flat_r[0], e.flat_r[1], e.flat_count));
    });
    add("l2_norm", job_l2_norm);
    add("fractional", job_fractional);
    add("multiplier_kernel", job_multiplier_kernel);
  } else if (sub == "atoms") {
    add("atom_forward", [](const Ctx& c) { return job_atom_image(c, Orientation::forward); });
    add("atom_dual", [](const Ctx& c) { return job_atom_image(c, Orientation::dual); });
    add("atom_ablation", job_atom_ablation);
  } else if (sub == "sharpness") {
    add("sharpness", job_sharpness);
  } else if (sub == "roi") {
    add("roi_measure", job_roi);
  } else if (sub == "pdo") {
    add("pdo_norm", job_pdo);
  } else {
    throw ConfigError("unknown subcommand '" + sub + "'");
  }
  if (!e.select.empty()) {
    std::vector<Job> kept;
    for (const auto& name : e.select) {
      auto it = std::find_if(jobs.begin(), jobs.end(), [&](const Job& j) { return j.name == name; });
      if (it == jobs.end()) throw ConfigError("/experiment/select: '" + name + "' is not an experiment of " + sub);
      kept.push_back(*it);
    }
    jobs = std::move(kept);
  }
  return jobs;
}

inline std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

inline std::string compiler_version() {
#if defined(__clang__)
  return std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  return std::string("gcc ") + __VERSION__;
#else
  return "unknown";
#endif
}

}  // namespace runner_detail

/// Runs every job of a subcommand, writes one CSV per job plus manifest.json.
/// Exit code 0 when every job passes, 1 otherwise. Throws ConfigError for an
/// unknown subcommand and Error for I/O problems.
inline RunSummary run(const ExperimentConfig& cfg, const std::string& subcommand, const RunOptions& opt = {}) {
  using namespace runner_detail;
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  auto ctx = std::make_shared<Ctx>();
  ctx->cfg = cfg;
  ctx->params = to_json(cfg).dump();
  ctx->N = config_shape(cfg).total_dim();
  ctx->n = config_shape(cfg).blocks();
  ctx->spec = build_spec(cfg);
  std::vector<Job> jobs = build_jobs(ctx, subcommand);

  const std::filesystem::path out = opt.out_dir.empty() ? cfg.output : opt.out_dir;
  std::filesystem::create_directories(out);

  std::vector<JobResult> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
      try {
        results[k] = jobs[k].run();
      } catch (const PreconditionError& e) {
        results[k].rows = {ctx->note_row(jobs[k].name, "precondition", 0.0, std::string("skipped(") + e.what() + ")")};
        results[k].pass = true;
        results[k].note = std::string("skipped: ") + e.what();
      } catch (const std::exception& e) {
        results[k].pass = false;
        errors[k] = e.what();
      }
    }
  };
  const int K = std::clamp(opt.jobs, 1, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  if (K == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < K; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  RunSummary summary;
  bool all = true;
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    JobOutcome oc;
    oc.name = jobs[k].name;
    oc.file = jobs[k].name + ".csv";
    oc.pass = results[k].pass && errors[k].empty();
    oc.note = errors[k].empty() ? results[k].note : "error: " + errors[k];
    csv::write((out / oc.file).string(), results[k].rows);
    for (const auto& [fname, text] : results[k].extra_files) {
      csv::write_file((out / fname).string(), text);
      oc.extra_files.push_back(fname);
    }
    files.push_back({{"experiment", oc.name}, {"file", oc.file}, {"pass", oc.pass}, {"note", oc.note},
                     {"extra_files", oc.extra_files}});
    all = all && oc.pass;
    summary.outcomes.push_back(std::move(oc));
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json manifest = {
      {"subcommand", subcommand},
      {"config_hash", "fnv1a64:" + hex64(fnv1a(ctx->params))},
      {"seed", cfg.seed},
      {"config", to_json(cfg)},
      {"versions",
       {{"pfio", kVersion},
        {"fftw", std::string(fftw_version)},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", compiler_version()}}},
      {"started_utc", started},
      {"wall_time_s", wall},
      {"jobs", K},
      {"files", files},
      {"pass", all}};
  summary.manifest_path = (out / "manifest.json").string();
  csv::write_file(summary.manifest_path, manifest.dump(2) + "\n");
  summary.exit_code = all ? 0 : 1;
  return summary;
}

}  // namespace pfio
