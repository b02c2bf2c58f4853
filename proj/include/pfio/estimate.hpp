#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pfio/angular.hpp"
#include "pfio/error.hpp"
#include "pfio/fio.hpp"
#include "pfio/fit.hpp"
#include "pfio/grid.hpp"
#include "pfio/littlewood_paley.hpp"
#include "pfio/mollifier.hpp"
#include "pfio/types.hpp"

namespace pfio {

/// Volume of the unit ball in R^N.
inline double unit_ball_volume(int N) { return std::pow(kPi, 0.5 * N) / std::tgamma(0.5 * N + 1.0); }

/// H^1 atom: b(|x - x_o|/delta) - kappa b(2|x - x_o|/delta), kappa making the
/// lattice sum vanish, scaled so that max|a| = |B_delta|^{-1}.
struct Atom {
  Vec x_o;
  double delta = 0.0;
  double ball_measure = 0.0;
  SampledField field;

  double norm(double p) const {
    for (const auto& [q, v] : cache_)
      if (q == p) return v;
    double v = lp_norm(field, p);
    cache_.emplace_back(p, v);
    return v;
  }

 private:
  mutable std::vector<std::pair<double, double>> cache_;
};

inline Atom make_atom(const GridSpec& g, const Vec& x_o, double delta) {
  if (x_o.size() != g.dim()) throw SizingError("atom center dimension does not match grid");
  double hmax = 0.0;
  for (int a = 0; a < g.dim(); ++a) hmax = std::max(hmax, g.spacing(a));
  if (!(delta >= 4.0 * hmax)) throw PreconditionError("atom radius must span at least 4 grid cells");
  for (int a = 0; a < g.dim(); ++a)
    if (std::abs(x_o[a]) + delta > g.half_width[a] - g.spacing(a))
      throw PreconditionError("atom ball leaves the grid box");
  Atom at;
  at.x_o = x_o;
  at.delta = delta;
  at.ball_measure = unit_ball_volume(g.dim()) * std::pow(delta, g.dim());
  SampledField b1(g, Domain::physical), b2(g, Domain::physical);
  double s1 = 0.0, s2 = 0.0;
  for_each_point(g, Domain::physical, [&](std::size_t k, const Vec& x) {
    double r = (x - x_o).norm() / delta;
    if (r >= 1.0) return;
    double u = bump(r), v = bump(2.0 * r);
    b1.values[k] = u;
    b2.values[k] = v;
    s1 += u;
    s2 += v;
  });
  const double kappa = s1 / s2;
  at.field = SampledField(g, Domain::physical);
  double mx = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    at.field.values[k] = b1.values[k] - kappa * b2.values[k];
    mx = std::max(mx, std::abs(at.field.values[k]));
  }
  const double c = 1.0 / (mx * at.ball_measure);
  for (auto& z : at.field.values) z *= c;
  return at;
}

/// One measured row of an experiment sweep; skipped rows carry a NaN measurement.
struct SweepPoint {
  std::string sweep_var;
  double sweep_value = 0.0;
  double measured = std::numeric_limits<double>::quiet_NaN();
  std::string note;
  bool skipped() const { return std::isnan(measured); }
};

struct SweepReport {
  std::string experiment;
  std::vector<SweepPoint> points;
  DecayFitReport fit;
  double spread = std::numeric_limits<double>::quiet_NaN();  // max/min of the acceptance quantity
  bool pass = false;
  std::string note;

  std::vector<double> measured() const {
    std::vector<double> v;
    for (const auto& p : points)
      if (!p.skipped()) v.push_back(p.measured);
    return v;
  }
};

namespace detail {

inline void require_critical_order(const FioSpec& s) {
  const int N = s.grid.shape.total_dim(), n = s.grid.shape.blocks();
  if (std::abs(s.symbol.order + 0.5 * (N - n)) > 1e-12)
    throw PreconditionError("symbol order must equal -(N - n)/2");
}

inline DyadicTuple diagonal_tuple(const FioSpec& s, int j) {
  return DyadicTuple::make(std::vector<int>(s.grid.shape.blocks(), j), s.symbol.rho);
}

inline Multiplier delta_t_multiplier(const ProductSpaceShape& shape, const DyadicTuple& tp) {
  return [shape, tp](const Vec& xi) { return Complex(delta_t(tp, shape, xi)); };
}

inline double masked_l1(const SampledField& f, const std::vector<std::uint8_t>& mask, bool inside) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (static_cast<bool>(mask[k]) == inside) s += std::abs(f.values[k]);
  return s * f.grid.cell_volume();
}

inline Vec unit_axis(int dim, int a) {
  Vec e = Vec::Zero(dim);
  e[a] = 1.0;
  return e;
}

}  // namespace detail

/// Omega_t(., y) over the x lattice.
inline SampledField kernel_omega_t_over_x(const FioSpec& s, const DyadicTuple& tp, const Vec& y) {
  require_tuple_shape(tp, s.grid.shape);
  Multiplier m = detail::delta_t_multiplier(s.grid.shape, tp);
  return kernel_over_x(s, y, &m);
}

/// int |Omega_t(x, y)| dx as a lattice sum.
inline double kernel_mass(const FioSpec& s, const DyadicTuple& tp, const Vec& y) {
  return lp_norm(kernel_omega_t_over_x(s, tp, y), 1.0);
}

/// Masses over a tuple sweep, fitted against sum_i (t_i - j)(N_i - 1)/2 with j = max t.
/// Passes when the fitted slope is >= 0.75 (if any tuple is off the diagonal) and
/// the diagonal masses satisfy max/min <= 3.
inline SweepReport verify_kernel_mass(const FioSpec& s, const std::vector<DyadicTuple>& tuples, const Vec& y) {
  detail::require_critical_order(s);
  const auto& shape = s.grid.shape;
  SweepReport r;
  r.experiment = "kernel_mass";
  std::vector<double> xs, ys, diag;
  for (const auto& tp : tuples) {
    const int j = tp.max();
    double ab = 0.0;
    for (int i = 0; i < shape.blocks(); ++i) ab += 0.5 * (tp.t[i] - j) * (shape.dim(i) - 1);
    double mass = kernel_mass(s, tp, y);
    xs.push_back(ab);
    ys.push_back(std::log2(mass));
    if (ab == 0.0) diag.push_back(mass);
    std::string name = "t=(";
    for (int i = 0; i < tp.size(); ++i) name += (i ? ";" : "") + std::to_string(tp.t[i]);
    name += ")";
    r.points.push_back({ab == 0.0 ? "j" : "sum(t_i-j)(N_i-1)/2", ab == 0.0 ? double(j) : ab, mass, name});
  }
  const bool off_diag = std::any_of(xs.begin(), xs.end(), [](double v) { return v != 0.0; });
  if (off_diag) {
    r.fit = fit_line(xs, ys, "log2 mass vs sum(t_i-j)(N_i-1)/2");
  } else {
    std::vector<double> js;
    for (const auto& tp : tuples) js.push_back(tp.max());
    r.fit = fit_line(js, ys, "log2 mass vs j");
  }
  r.spread = max_over_min(diag);
  bool slope_ok = !off_diag || r.fit.slope >= 0.75;
  bool diag_ok = diag.size() < 2 || r.spread <= 3.0;
  r.pass = slope_ok && diag_ok;
  r.fit.pass = r.pass;
  return r;
}

/// int |Omega_j(x, y) - Omega_j(x, z)| dx for z = y + d e_1 and d = frac 2^{-j};
/// measured value is the ratio to 2^j |y - z|. Pass iff that ratio varies by <= 2.
inline SweepReport verify_kernel_lipschitz(const FioSpec& s, const std::vector<int>& js, const Vec& y,
                                           const std::vector<double>& fractions = {0.25, 0.5}) {
  SweepReport r;
  r.experiment = "kernel_lipschitz";
  std::vector<double> xs, ys, ratios;
  const Vec e = detail::unit_axis(s.grid.dim(), 0);
  for (int j : js) {
    auto tp = detail::diagonal_tuple(s, j);
    SampledField K = kernel_omega_t_over_x(s, tp, y);
    for (double fr : fractions) {
      if (!(fr > 0.0 && fr <= 1.0)) throw PreconditionError("displacement must satisfy 0 < |y - z| <= 2^-j");
      const double d = fr * std::exp2(-j);
      SampledField Kz = kernel_omega_t_over_x(s, tp, Vec(y + d * e));
      double diff = 0.0;
      for (std::size_t k = 0; k < K.size(); ++k) diff += std::abs(K.values[k] - Kz.values[k]);
      diff *= s.grid.cell_volume();
      const double scaled = std::exp2(j) * d;
      xs.push_back(std::log2(scaled));
      ys.push_back(std::log2(diff));
      ratios.push_back(diff / scaled);
      r.points.push_back({"j(|y-z|=" + std::to_string(fr).substr(0, 4) + "*2^-j)", double(j), diff / scaled,
                          "difference_mass=" + std::to_string(diff)});
    }
  }
  r.fit = fit_line(xs, ys, "log2 difference mass vs log2(2^j|y-z|)");
  r.spread = max_over_min(ratios);
  r.pass = ratios.size() >= 2 && r.spread <= 2.0;
  r.fit.pass = r.pass;
  return r;
}

inline constexpr const char* kTailSkipNote = "skipped(precondition 2^j > 1/delta)";

/// int over the complement of B*_delta(x_o) of |Omega_j(x, y)| dx, fitted against j.
/// Levels with 2^j <= 1/delta are reported as skipped rows. Pass iff slope <= -0.75.
inline SweepReport verify_tail_bound(const FioSpec& s, const std::vector<int>& js, double delta, const Vec& x_o,
                                     const Vec& y, RegionOptions opt = {}) {
  SweepReport r;
  r.experiment = "kernel_tail";
  opt.mc_samples = 0;
  std::vector<int> live;
  for (int j : js) {
    if (std::exp2(j) > 1.0 / delta)
      live.push_back(j);
    else
      r.points.push_back({"j", double(j), std::numeric_limits<double>::quiet_NaN(), kTailSkipNote});
  }
  if (live.empty()) {
    r.note = "every level fails 2^j > 1/delta";
    return r;
  }
  InfluenceRegion reg = region_of_influence(s.grid, s.phase, x_o, delta, Orientation::forward, opt);
  std::vector<double> xs, ys;
  for (int j : live) {
    SampledField K = kernel_omega_t_over_x(s, detail::diagonal_tuple(s, j), y);
    double tail = detail::masked_l1(K, reg.indicator, false);
    xs.push_back(j);
    ys.push_back(std::log2(tail));
    r.points.push_back({"j", double(j), tail, "tail*2^j*delta=" + std::to_string(tail * std::exp2(j) * delta)});
  }
  std::stable_sort(r.points.begin(), r.points.end(),
                   [](const SweepPoint& a, const SweepPoint& b) { return a.sweep_value < b.sweep_value; });
  r.fit = fit_line(xs, ys, "log2 tail vs j");
  r.pass = xs.size() >= 2 && r.fit.slope <= -0.75;
  r.fit.pass = r.pass;
  return r;
}

struct AtomImage {
  Orientation orientation = Orientation::forward;
  double delta = 0.0;
  double inside = 0.0;          // int over B*_delta of |F a|
  double cauchy_schwarz = 0.0;  // |B*_delta|^{1/2} ||F a||_2, bounds inside
  double outside = 0.0;         // int over the complement
  double total = 0.0;
  double region_measure = 0.0;
};

inline SampledField apply_oriented(const FioSpec& s, const SampledField& f, Orientation o,
                                   const Multiplier* extra = nullptr) {
  return o == Orientation::forward ? apply_fio(s, f, extra) : apply_adjoint(s, f, extra);
}

/// int |F a| (or |F* a|) split over B*_delta and its complement.
inline AtomImage atom_image_bound(const FioSpec& s, const Atom& atom, Orientation o, RegionOptions opt = {}) {
  detail::require_critical_order(s);
  opt.mc_samples = 0;
  SampledField Fa = apply_oriented(s, atom.field, o);
  InfluenceRegion reg = region_of_influence(s.grid, s.phase, atom.x_o, atom.delta, o, opt);
  AtomImage out;
  out.orientation = o;
  out.delta = atom.delta;
  out.region_measure = reg.grid_measure(s.grid);
  out.inside = detail::masked_l1(Fa, reg.indicator, true);
  out.outside = detail::masked_l1(Fa, reg.indicator, false);
  out.total = out.inside + out.outside;
  out.cauchy_schwarz = std::sqrt(out.region_measure) * lp_norm(Fa, 2.0);
  return out;
}

struct CancellationReport {
  double mean_zero = 0.0;  // int |F P a| with P = psi0(delta |xi|)
  double absolute = 0.0;   // same for |a|
  double ratio = 0.0;
};

/// Low-frequency part (|xi| <~ 1/delta) of the atom image with and without cancellation.
inline CancellationReport cancellation_ablation(const FioSpec& s, const Atom& atom, Orientation o) {
  const double d = atom.delta;
  Multiplier low = [d](const Vec& xi) { return Complex(psi0(d * xi.norm())); };
  SampledField abs_a = atom.field;
  for (auto& z : abs_a.values) z = std::abs(z);
  CancellationReport r;
  r.mean_zero = lp_norm(apply_oriented(s, atom.field, o, &low), 1.0);
  r.absolute = lp_norm(apply_oriented(s, abs_a, o, &low), 1.0);
  r.ratio = r.absolute / r.mean_zero;
  return r;
}

enum class NormMethod { power_iteration, ensemble_max };

inline const char* to_string(NormMethod m) {
  return m == NormMethod::power_iteration ? "power_iteration" : "ensemble_max";
}

struct NormEstimate {
  double p = 2.0;
  std::size_t ensemble_size = 0;
  double value = 0.0;
  NormMethod method = NormMethod::ensemble_max;
  int iterations = 0;
  std::vector<double> probe_ratios;
  std::vector<std::string> probe_labels;
};

struct EnsembleOptions {
  int atoms = 16;
  int bumps = 8;
  int random_fields = 8;
  std::vector<double> atom_radii{0.25, 0.125, 0.0625, 0.03125};
  double center_spread = 0.25;  // atom centers drawn from [-spread, spread]^N
  double band = -1.0;           // random fields live on |xi^i| <= band; <= 0: half the block Nyquist
  std::uint64_t seed = 29;
  int max_iterations = 50;
  double tolerance = 1e-10;
};

struct Probe {
  std::string label;
  SampledField field;
};

/// Atoms over shuffled radii and centers, Delta_t bumps and band-limited random fields.
inline std::vector<Probe> build_ensemble(const GridSpec& g, const EnsembleOptions& opt, double rho = 0.0) {
  std::vector<Probe> out;
  std::mt19937_64 rng(opt.seed);
  double hmax = 0.0;
  for (int a = 0; a < g.dim(); ++a) hmax = std::max(hmax, g.spacing(a));
  std::vector<double> radii;
  for (double r : opt.atom_radii)
    if (r >= 4.0 * hmax) radii.push_back(r);
  if (!radii.empty()) {
    std::uniform_real_distribution<double> u(-opt.center_spread, opt.center_spread);
    for (int k = 0; k < opt.atoms; ++k) {
      double r = radii[k % radii.size()];
      Vec c = Vec::Zero(g.dim());
      if (k >= static_cast<int>(radii.size()))
        for (int a = 0; a < g.dim(); ++a) c[a] = u(rng);
      try {
        out.push_back({"atom(delta=" + std::to_string(r) + ")", make_atom(g, c, r).field});
      } catch (const PreconditionError&) {
      }
    }
  }
  const int tmax = tmax_for_grid(g);
  if (tmax >= 1 && opt.bumps > 0) {
    // cycle through the tuples; each bump gets its own seeded center
    auto tuples = enumerate_tuples(g.shape.blocks(), tmax, rho);
    std::uniform_real_distribution<double> u(-opt.center_spread, opt.center_spread);
    for (int k = 0; k < opt.bumps; ++k) {
      const auto& tp = tuples[(static_cast<std::size_t>(k) * 7) % tuples.size()];
      Vec c = Vec::Zero(g.dim());
      if (k > 0)
        for (int a = 0; a < g.dim(); ++a) c[a] = u(rng);
      auto fh = SampledField::from_function(g, Domain::frequency, [&](const Vec& xi) {
        double v = delta_t(tp, g.shape, xi);
        return v == 0.0 ? Complex(0.0) : v * std::polar(1.0, -kTwoPi * c.dot(xi));
      });
      std::string name = "bump(t=";
      for (int i = 0; i < tp.size(); ++i) name += (i ? ";" : "") + std::to_string(tp.t[i]);
      out.push_back({name + ")", inverse_transform(std::move(fh))});
    }
  }
  std::normal_distribution<double> nd;
  for (int k = 0; k < opt.random_fields; ++k) {
    SampledField fh(g, Domain::frequency);
    for_each_point(g, Domain::frequency, [&](std::size_t idx, const Vec& xi) {
      for (int i = 0; i < g.shape.blocks(); ++i) {
        double band = opt.band > 0.0 ? opt.band : 0.5 * g.min_nyquist(i);
        if (g.shape.block(xi, i).norm() > band) return;
      }
      double re = nd(rng), im = nd(rng);
      fh.values[idx] = Complex(re, im);
    });
    out.push_back({"random(" + std::to_string(k) + ")", inverse_transform(std::move(fh))});
  }
  return out;
}

/// ||F||_{p->p}: power iteration on F*F for p = 2, ensemble maximum otherwise.
/// Probe ratios are always filled in.
inline NormEstimate empirical_operator_norm(const FioSpec& s, double p, const EnsembleOptions& opt = {}) {
  if (std::isnan(p) || p < 1.0) throw DomainError("operator norm needs p in [1, inf]");
  NormEstimate est;
  est.p = p;
  auto probes = build_ensemble(s.grid, opt, s.symbol.rho);
  est.ensemble_size = probes.size();
  double best = 0.0;
  for (const auto& pr : probes) {
    double den = lp_norm(pr.field, p);
    if (den == 0.0) continue;
    double v = lp_norm(apply_fio(s, pr.field), p) / den;
    est.probe_ratios.push_back(v);
    est.probe_labels.push_back(pr.label);
    best = std::max(best, v);
  }
  if (p != 2.0) {
    est.method = NormMethod::ensemble_max;
    est.value = best;
    return est;
  }
  est.method = NormMethod::power_iteration;
  // Start from the best probe plus a little noise; the Rayleigh quotients of
  // (F*F)^k v are nondecreasing, so the iterate ends up above that probe.
  std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> nd;
  SampledField v(s.grid, Domain::physical);
  for (auto& z : v.values) z = Complex(nd(rng), nd(rng));
  if (!est.probe_ratios.empty()) {
    std::size_t arg = std::max_element(est.probe_ratios.begin(), est.probe_ratios.end()) - est.probe_ratios.begin();
    std::size_t idx = 0;
    for (const auto& pr : probes)
      if (lp_norm(pr.field, p) != 0.0 && idx++ == arg) {
        double np = lp_norm(pr.field, 2.0), nn = lp_norm(v, 2.0);
        for (std::size_t k = 0; k < v.size(); ++k) v.values[k] = pr.field.values[k] / np + 1e-3 * v.values[k] / nn;
        break;
      }
  }
  double lambda = 0.0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    double nv = lp_norm(v, 2.0);
    if (nv == 0.0) break;
    for (auto& z : v.values) z /= nv;
    SampledField w = apply_fio(s, v);
    double next = lp_norm(w, 2.0);
    est.iterations = it;
    bool done = it > 1 && std::abs(next - lambda) < opt.tolerance * next;
    lambda = next;
    if (done || next == 0.0) break;
    v = apply_adjoint(s, w);
  }
  est.value = lambda;
  return est;
}

struct PInterval {
  double p_min = 2.0;
  double p_max = 2.0;
  bool contains(double p, double tol = 1e-12) const {
    return p >= p_min * (1.0 - tol) && (std::isinf(p_max) || p <= p_max * (1.0 + tol));
  }
};

/// Exponents with |1/2 - 1/p| <= -m/(N - n).
inline PInterval admissible_p_interval(double m, int N, int n) {
  if (!(N > n && n >= 1)) throw PreconditionError("admissible interval needs N > n >= 1");
  const double k = N - n;
  if (!(m <= 0.0 && m > -0.5 * k)) throw DomainError("order must satisfy -(N - n)/2 < m <= 0");
  // one division each so the endpoints are correctly rounded
  return PInterval{2.0 * k / (k - 2.0 * m), 2.0 * k / (k + 2.0 * m)};
}

struct SharpnessReport {
  double p = 2.0;
  bool inside = true;
  SweepReport sweep;  // r_j(p) = max over the two families
  DecayFitReport dispersing;
  DecayFitReport focusing;
};

/// r_j(p) = ||F f_j||_p / ||f_j||_p for fhat_j = phi(2^-j xi) (dispersing) and
/// fhat_j = phi(2^-j xi) e^{-2 pi i h(xi)} (focusing onto the origin), with h the
/// frequency part of the phase. Slopes of log2 r_j against j are fitted per p.
inline std::vector<SharpnessReport> sharpness_experiment(const FioSpec& s, const std::vector<double>& ps,
                                                         const std::vector<int>& js) {
  const auto& shape = s.grid.shape;
  if (shape.blocks() != 1 || shape.total_dim() < 2) throw PreconditionError("sharpness needs n = 1 and N >= 2");
  if (s.phase.factors[0].kind != PhaseKind::half_wave_plus && s.phase.factors[0].kind != PhaseKind::half_wave_minus)
    throw PreconditionError("sharpness needs the half-wave phase");
  if (!s.phase.linear_in_x()) throw PreconditionError("sharpness needs a phase linear in x");
  {
    Vec e = detail::unit_axis(shape.total_dim(), 0);
    for (double sign : {1.0, -1.0})
      if (s.symbol.eval(Vec(sign * e), Vec(e)) == 0.0)
        throw PreconditionError("amplitude must not vanish on |x| = 1");
  }
  const PInterval I = s.symbol.order > -0.5 * (shape.total_dim() - 1)
                          ? admissible_p_interval(s.symbol.order, shape.total_dim(), 1)
                          : PInterval{1.0, std::numeric_limits<double>::infinity()};
  const std::size_t P = ps.size();
  std::vector<std::vector<double>> disp(P), foc(P);
  for (int j : js) {
    for (int family = 0; family < 2; ++family) {
      auto fh = SampledField::from_function(s.grid, Domain::frequency, [&](const Vec& xi) {
        double v = bump_phi(std::exp2(-j) * xi.norm());
        if (v == 0.0) return Complex(0.0);
        return family == 0 ? Complex(v) : v * std::polar(1.0, -kTwoPi * s.phase.frequency_part(xi));
      });
      SampledField f = inverse_transform(std::move(fh));
      SampledField Ff = apply_fio(s, f);
      for (std::size_t k = 0; k < P; ++k) {
        double r = lp_norm(Ff, ps[k]) / lp_norm(f, ps[k]);
        (family == 0 ? disp : foc)[k].push_back(r);
      }
    }
  }
  std::vector<SharpnessReport> out;
  std::vector<double> xs(js.begin(), js.end());
  for (std::size_t k = 0; k < P; ++k) {
    SharpnessReport rep;
    rep.p = ps[k];
    rep.inside = I.contains(ps[k]);
    auto logs = [](const std::vector<double>& v) {
      std::vector<double> o;
      for (double a : v) o.push_back(std::log2(a));
      return o;
    };
    rep.dispersing = fit_line(xs, logs(disp[k]), "dispersing");
    rep.focusing = fit_line(xs, logs(foc[k]), "focusing");
    std::vector<double> mx(js.size());
    for (std::size_t q = 0; q < js.size(); ++q) mx[q] = std::max(disp[k][q], foc[k][q]);
    rep.sweep.experiment = "sharpness";
    for (std::size_t q = 0; q < js.size(); ++q)
      rep.sweep.points.push_back({"j", xs[q], mx[q], "p=" + std::to_string(ps[k])});
    rep.sweep.fit = fit_line(xs, logs(mx), "log2 r_j vs j");
    rep.sweep.pass = rep.inside ? rep.sweep.fit.slope <= 0.1 : rep.sweep.fit.slope >= 0.1;
    rep.sweep.fit.pass = rep.sweep.pass;
    rep.sweep.note = rep.inside ? "inside admissible interval" : "outside admissible interval";
    out.push_back(std::move(rep));
  }
  return out;
}

struct FractionalReport {
  double p = 2.0;  // 1/p = 1/2 - m/N
  double q = 2.0;  // 1/q = 1/2 + m/N
  SweepReport to_l2;    // ||F a||_2 / ||a||_p over atom radii
  SweepReport from_l2;  // ||F a||_q / ||a||_2
  bool pass = false;
};

inline FractionalReport fractional_mapping_experiment(const FioSpec& s, const std::vector<double>& radii,
                                                      const Vec& x_o) {
  const int N = s.grid.shape.total_dim();
  const double m = s.symbol.order;
  if (!(m < 0.0 && m > -0.5 * N)) throw PreconditionError("fractional mapping needs -N/2 < m < 0");
  FractionalReport r;
  r.p = 1.0 / (0.5 - m / N);
  r.q = 1.0 / (0.5 + m / N);
  r.to_l2.experiment = "fractional_lp_to_l2";
  r.from_l2.experiment = "fractional_l2_to_lq";
  std::vector<double> xs;
  for (double d : radii) {
    Atom a = make_atom(s.grid, x_o, d);
    SampledField Fa = apply_fio(s, a.field);
    double v1 = lp_norm(Fa, 2.0) / a.norm(r.p);
    double v2 = lp_norm(Fa, r.q) / a.norm(2.0);
    r.to_l2.points.push_back({"delta", d, v1, "p=" + std::to_string(r.p)});
    r.from_l2.points.push_back({"delta", d, v2, "q=" + std::to_string(r.q)});
  }
  for (SweepReport* sr : {&r.to_l2, &r.from_l2}) {
    std::vector<double> ds, vs;
    for (const auto& pt : sr->points) {
      ds.push_back(pt.sweep_value);
      vs.push_back(pt.measured);
    }
    sr->fit = fit_loglog(ds, vs, "log2 ratio vs log2 delta");
    sr->spread = max_over_min(vs);
    sr->pass = vs.size() >= 2 && sr->spread <= 4.0;
    sr->fit.pass = sr->pass;
  }
  r.pass = r.to_l2.pass && r.from_l2.pass;
  return r;
}

/// |G(r e_1)| for G the inverse transform of (1 + |xi|^2)^{m/2} under the Nyquist taper,
/// fitted on log-log axes over lattice radii in [r_lo, r_hi]. Pass iff slope <= -(N + m) + 0.5.
inline DecayFitReport multiplier_kernel_decay(const GridSpec& g, double m, double r_lo, double r_hi,
                                              double taper_plateau = 0.8) {
  const int N = g.dim();
  auto fh = SampledField::from_function(g, Domain::frequency, [&](const Vec& xi) {
    double w = 1.0;
    for (int i = 0; i < g.shape.blocks(); ++i)
      w *= nyquist_taper(g.shape.block(xi, i).norm(), g.min_nyquist(i), taper_plateau);
    return Complex(w * std::pow(1.0 + xi.squaredNorm(), 0.5 * m));
  });
  SampledField G = inverse_transform(std::move(fh));
  std::vector<double> rs, vs;
  const int M = g.samples[0];
  std::size_t stride = 1;
  for (int a = 1; a < N; ++a) stride *= g.samples[a];
  std::size_t center = 0;
  for (int a = 0; a < N; ++a) center = center * g.samples[a] + g.samples[a] / 2;
  for (int k = 1; k < M / 2; ++k) {
    double r = k * g.spacing(0);
    if (r < r_lo || r > r_hi) continue;
    rs.push_back(r);
    vs.push_back(std::abs(G.values[center + k * stride]));
  }
  DecayFitReport rep = fit_loglog(rs, vs, "log2 |G(r)| vs log2 r");
  rep.pass = rs.size() >= 2 && rep.slope <= -(N + m) + 0.5;
  return rep;
}

/// |Omega#(xi, xi + r step)| over log-spaced r in [r_lo, r_hi]. The value oscillates
/// through zeros, so the fit uses the running envelope max_{r' >= r} |Omega#| against
/// log2(1 + r). Pass iff slope <= -2 and residual < 0.5.
inline SweepReport omega_sharp_decay(const FioSpec& s, const Vec& xi, const Vec& step, double r_lo, double r_hi,
                                     int count) {
  if (!(r_lo > 0.0 && r_hi > r_lo && count >= 2)) throw DomainError("omega_sharp_decay needs 0 < r_lo < r_hi");
  SweepReport r;
  r.experiment = "omega_sharp";
  const Vec u = step / step.norm();
  std::vector<double> rs, vals;
  for (int k = 0; k < count; ++k) {
    double rr = r_lo * std::pow(r_hi / r_lo, static_cast<double>(k) / (count - 1));
    rs.push_back(rr);
    vals.push_back(std::abs(kernel_omega_sharp(s, xi, Vec(xi + rr * u))));
  }
  std::vector<double> env(vals.size()), xs, ys;
  double run = 0.0;
  for (std::size_t k = vals.size(); k-- > 0;) env[k] = run = std::max(run, vals[k]);
  for (std::size_t k = 0; k < rs.size(); ++k) {
    xs.push_back(std::log2(1.0 + rs[k]));
    ys.push_back(std::log2(env[k]));
    r.points.push_back({"|xi-eta|", rs[k], vals[k], "envelope=" + std::to_string(env[k])});
  }
  r.fit = fit_line(xs, ys, "log2 envelope vs log2(1+|xi-eta|)");
  r.pass = r.fit.slope <= -2.0 && r.fit.residual < 0.5;
  r.fit.pass = r.pass;
  return r;
}

/// |Omega-flat(x, x + r e_1)| over log-spaced r; pass iff slope <= -(N + 2m) + 0.5.
inline SweepReport omega_flat_decay(const FioSpec& s, const Vec& x, double r_lo, double r_hi, int count) {
  const int N = s.grid.shape.total_dim();
  const double m = s.symbol.order;
  if (!(m < 0.0 && m > -0.5 * N)) throw PreconditionError("omega_flat_decay needs -N/2 < m < 0");
  if (!(r_lo > 0.0 && r_hi > r_lo && count >= 2)) throw DomainError("omega_flat_decay needs 0 < r_lo < r_hi");
  SweepReport r;
  r.experiment = "omega_flat";
  const Vec e = detail::unit_axis(N, 0);
  std::vector<double> rs, vals;
  for (int k = 0; k < count; ++k) {
    double rr = r_lo * std::pow(r_hi / r_lo, static_cast<double>(k) / (count - 1));
    rs.push_back(rr);
    vals.push_back(std::abs(kernel_omega_flat(s, x, Vec(x + rr * e))));
    r.points.push_back({"|x-y|", rr, vals.back(), ""});
  }
  r.fit = fit_loglog(rs, vals, "log2 |Omega-flat| vs log2 |x-y|");
  r.pass = r.fit.slope <= -(N + 2.0 * m) + 0.5;
  r.fit.pass = r.pass;
  return r;
}

struct PdoSetup {
  ProductPhase phase;
  SymbolSpec symbol;
  std::vector<int> samples;
  std::vector<double> half_width;
  int refinements = 1;  // each refinement doubles the samples at fixed half-width
  EnsembleOptions ensemble;
};

struct PdoReport {
  std::vector<double> ps;
  std::vector<std::vector<double>> norms;  // [p][level]
  std::vector<double> spread;              // per p
  std::vector<double> power_vs_probe;      // p = 2 only: power value / best probe ratio, per level
  bool pass = false;
};

/// N = n case: ensemble norms for each p at the base grid and after each refinement.
/// Pass iff max/min across levels is <= 2 for every p.
inline PdoReport pdo_case_experiment(const PdoSetup& setup, const std::vector<double>& ps) {
  const auto& shape = setup.phase.shape;
  for (int i = 0; i < shape.blocks(); ++i)
    if (shape.dim(i) != 1) throw PreconditionError("N = n case needs every block of dimension 1");
  if (std::abs(setup.symbol.order) > 1e-12) throw PreconditionError("N = n case needs an order-0 symbol");
  GridSpec base = make_grid(shape, setup.samples, setup.half_width);
  EnsembleOptions ens = setup.ensemble;
  if (ens.band <= 0.0) ens.band = 0.5 * base.min_nyquist();
  PdoReport r;
  r.ps = ps;
  r.norms.assign(ps.size(), {});
  for (int level = 0; level <= setup.refinements; ++level) {
    std::vector<int> samples = setup.samples;
    for (int& v : samples) v <<= level;
    FioSpec spec{setup.phase, setup.symbol, make_grid(shape, samples, setup.half_width)};
    for (std::size_t k = 0; k < ps.size(); ++k) {
      NormEstimate est = empirical_operator_norm(spec, ps[k], ens);
      r.norms[k].push_back(est.value);
      if (ps[k] == 2.0 && !est.probe_ratios.empty())
        r.power_vs_probe.push_back(est.value /
                                   *std::max_element(est.probe_ratios.begin(), est.probe_ratios.end()));
    }
  }
  r.pass = true;
  for (const auto& v : r.norms) {
    r.spread.push_back(max_over_min(v));
    if (!(r.spread.back() <= 2.0)) r.pass = false;
  }
  return r;
}

}  // namespace pfio
