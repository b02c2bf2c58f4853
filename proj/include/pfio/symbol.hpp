#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "pfio/error.hpp"
#include "pfio/grid.hpp"
#include "pfio/mollifier.hpp"
#include "pfio/phase.hpp"
#include "pfio/types.hpp"

namespace pfio {

enum class SymbolKind { separable, product_rho0, custom };

inline const char* to_string(SymbolKind k) {
  switch (k) {
    case SymbolKind::separable: return "separable";
    case SymbolKind::product_rho0: return "product_rho0";
    case SymbolKind::custom: return "custom";
  }
  return "custom";
}

/// Symbol sigma(x, xi) in a class S^m_rho, compactly supported in x.
///
/// When amplitude and multiplier are both set, sigma = amplitude(x) * multiplier(xi)
/// and eval must agree with that product.
struct SymbolSpec {
  ProductSpaceShape shape;
  SymbolKind kind = SymbolKind::custom;
  double order = 0.0;
  double rho = 0.0;
  double x_support_radius = std::numeric_limits<double>::infinity();
  std::function<Complex(const Vec&, const Vec&)> eval;
  std::function<double(const Vec&)> amplitude;
  std::function<Complex(const Vec&)> multiplier;

  bool separable() const { return amplitude && multiplier; }
};

inline Complex eval_symbol(const SymbolSpec& s, const Vec& x, const Vec& xi) {
  if (x.norm() > s.x_support_radius) return 0.0;
  return s.eval(x, xi);
}

namespace symbols {

/// prod_i b(|x^i| / R)^power; R = inf means no cut.
inline std::function<double(const Vec&)> bump_amplitude(const ProductSpaceShape& shape, double R,
                                                        double power = 1.0) {
  if (std::isinf(R)) return [](const Vec&) { return 1.0; };
  if (!(R > 0.0)) throw DomainError("amplitude radius must be positive");
  return [shape, R, power](const Vec& x) {
    double a = 1.0;
    for (int i = 0; i < shape.blocks(); ++i) {
      double b = bump(shape.block(x, i).norm() / R);
      if (b == 0.0) return 0.0;
      a *= power == 1.0 ? b : std::pow(b, power);
    }
    return a;
  };
}

inline double amplitude_support(const ProductSpaceShape& shape, double R) {
  return std::isinf(R) ? R : R * std::sqrt(static_cast<double>(shape.blocks()));
}

inline SymbolSpec from_parts(const ProductSpaceShape& shape, SymbolKind kind, double m, double rho, double R,
                             std::function<double(const Vec&)> amp, std::function<Complex(const Vec&)> mult) {
  SymbolSpec s;
  s.shape = shape;
  s.kind = kind;
  s.order = m;
  s.rho = rho;
  s.x_support_radius = amplitude_support(shape, R);
  s.amplitude = amp;
  s.multiplier = mult;
  s.eval = [amp, mult](const Vec& x, const Vec& xi) {
    double a = amp(x);
    return a == 0.0 ? Complex(0.0) : a * mult(xi);
  };
  return s;
}

/// a(x) (1 + |xi|^2)^{m/2}
inline SymbolSpec separable(const ProductSpaceShape& shape, double m, double R, double rho = 0.0,
                            double amplitude_power = 1.0) {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0,1)");
  auto mult = [m](const Vec& xi) { return Complex(std::pow(1.0 + xi.squaredNorm(), 0.5 * m)); };
  return from_parts(shape, SymbolKind::separable, m, rho, R, bump_amplitude(shape, R, amplitude_power), mult);
}

/// a(x) prod_i (1 + |xi^i|^2)^{m_i/2}. Declared order is max_i m_i, the
/// sharp order of this product along the coordinate subspaces.
inline SymbolSpec product_rho0(const ProductSpaceShape& shape, std::vector<double> m, double R) {
  if (static_cast<int>(m.size()) != shape.blocks()) throw SizingError("one order per block required");
  auto mult = [shape, m](const Vec& xi) {
    double v = 1.0;
    for (int i = 0; i < shape.blocks(); ++i) v *= std::pow(1.0 + shape.block(xi, i).squaredNorm(), 0.5 * m[i]);
    return Complex(v);
  };
  double order = *std::max_element(m.begin(), m.end());
  return from_parts(shape, SymbolKind::product_rho0, order, 0.0, R, bump_amplitude(shape, R), mult);
}

inline SymbolSpec custom(const ProductSpaceShape& shape, double m, double rho, double support_radius,
                         std::function<Complex(const Vec&, const Vec&)> eval) {
  SymbolSpec s;
  s.shape = shape;
  s.kind = SymbolKind::custom;
  s.order = m;
  s.rho = rho;
  s.x_support_radius = support_radius;
  s.eval = std::move(eval);
  return s;
}

/// Multiplies a separable symbol by a smooth cone cutoff around axis:
/// 1 within angular distance aperture/2, 0 beyond aperture, and 0 for |xi| <= 1/2.
inline SymbolSpec cone_localized(SymbolSpec base, const Vec& axis, double aperture) {
  if (!base.separable()) throw DomainError("cone localization needs a separable symbol");
  if (!(aperture > 0.0 && aperture < 1.0)) throw DomainError("cone aperture must lie in (0,1)");
  Vec e = axis / axis.norm();
  auto inner = base.multiplier;
  auto mult = [inner, e, aperture](const Vec& xi) {
    double r = xi.norm();
    if (r <= 0.5) return Complex(0.0);
    double c = psi0(2.0 * (xi / r - e).norm() / aperture) * (1.0 - psi0(2.0 * r));
    return c == 0.0 ? Complex(0.0) : c * inner(xi);
  };
  double R = base.x_support_radius;
  auto amp = base.amplitude;
  SymbolSpec s = base;
  s.multiplier = mult;
  s.eval = [amp, mult](const Vec& x, const Vec& xi) {
    double a = amp(x);
    return a == 0.0 ? Complex(0.0) : a * mult(xi);
  };
  s.x_support_radius = R;
  return s;
}

inline SymbolSpec scaled(SymbolSpec base, Complex c) {
  auto ev = base.eval;
  base.eval = [ev, c](const Vec& x, const Vec& xi) { return c * ev(x, xi); };
  if (base.multiplier) {
    auto m = base.multiplier;
    base.multiplier = [m, c](const Vec& xi) { return c * m(xi); };
  }
  return base;
}

}  // namespace symbols

namespace detail {

// all multi-indices over `vars` variables with total order <= max_order, graded
inline std::vector<std::vector<int>> multi_indices(int vars, int max_order) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(vars, 0);
  for (int total = 0; total <= max_order; ++total) {
    std::function<void(int, int)> rec = [&](int k, int left) {
      if (k == vars - 1) {
        cur[k] = left;
        out.push_back(cur);
        return;
      }
      for (int a = left; a >= 0; --a) {
        cur[k] = a;
        rec(k + 1, left - a);
      }
    };
    if (vars > 0) rec(0, total);
  }
  return out;
}

// central-difference weights on offsets -2..2 for derivative order 0..3
inline const double* fd_weights(int order) {
  static const double w[4][5] = {{0, 0, 1, 0, 0},
                                 {0, -0.5, 0, 0.5, 0},
                                 {0, 1, -2, 1, 0},
                                 {-0.5, 1, 0, -1, 0.5}};
  return w[order];
}

// tensor finite difference of f over variables z with per-variable steps
template <class F>
Complex tensor_difference(F&& f, const Vec& z, const std::vector<int>& gamma, const std::vector<double>& steps) {
  std::vector<int> active;
  for (int k = 0; k < static_cast<int>(gamma.size()); ++k)
    if (gamma[k] > 0) active.push_back(k);
  if (active.empty()) return f(z);
  Complex sum = 0.0;
  std::vector<int> off(active.size(), -2);
  Vec p = z;
  while (true) {
    double w = 1.0;
    for (std::size_t a = 0; a < active.size() && w != 0.0; ++a) w *= fd_weights(gamma[active[a]])[off[a] + 2];
    if (w != 0.0) {
      for (std::size_t a = 0; a < active.size(); ++a) p[active[a]] = z[active[a]] + off[a] * steps[active[a]];
      sum += w * f(p);
    }
    std::size_t a = 0;
    for (; a < active.size(); ++a) {
      if (++off[a] <= 2) break;
      off[a] = -2;
    }
    if (a == active.size()) break;
  }
  for (int k : active) sum /= std::pow(steps[k], gamma[k]);
  return sum;
}

}  // namespace detail

struct ProbeOptions {
  int max_octave = 7;
  int directions = 0;  // sphere directions in R^N; 0 picks a dimension-based default
  int x_points = 4;
  double xi_step = 0.05;
  double x_step = 0.01;  // relative to min(1, support radius)
  double cap = 1e3;
  bool refine = true;
  std::uint64_t seed = 11;
};

namespace detail {

inline std::vector<Vec> frequency_probes(const ProductSpaceShape& shape, int max_octave, int directions,
                                         double octave_step) {
  const int N = shape.total_dim();
  if (directions <= 0) directions = N == 1 ? 2 : (N == 2 ? 16 : 12 * N);
  std::vector<Vec> dirs = direction_net(N, directions);
  // near-axis directions: one block shrunk toward its coordinate subspace
  if (shape.blocks() > 1) {
    std::vector<Vec> extra;
    for (const auto& u : dirs) {
      for (int i = 0; i < shape.blocks(); ++i) {
        for (double shrink : {0.0, 1e-2}) {
          Vec v = u;
          shape.block(v, i) *= shrink;
          if (v.norm() > 1e-12) extra.push_back(v / v.norm());
        }
      }
    }
    dirs.insert(dirs.end(), extra.begin(), extra.end());
  }
  std::vector<Vec> out;
  for (double k = 0.0; k <= max_octave + 1e-12; k += octave_step)
    for (const auto& u : dirs) out.push_back(std::exp2(k) * u);
  return out;
}

inline std::vector<Vec> x_probes(int N, double support, int count, std::uint64_t seed) {
  std::vector<Vec> out;
  out.push_back(Vec::Zero(N));
  double box = std::isinf(support) ? 1.0 : 0.7 * support / std::sqrt(static_cast<double>(N));
  std::mt19937_64 rng(seed);
  for (int k = 1; k < count; ++k) out.push_back(detail::random_box(rng, N, box));
  return out;
}

}  // namespace detail

struct ClassEntry {
  std::vector<int> alpha;  // xi derivatives, one entry per coordinate
  std::vector<int> beta;   // x derivatives
  double sup_ratio = 0.0;
  double refined_sup_ratio = 0.0;
};

struct ClassReport {
  std::vector<ClassEntry> entries;
  double max_ratio = 0.0;
  double cap = 0.0;
  bool finite = true;
  bool stable = true;
  bool pass = false;
};

/// Sup over probes of |d^alpha_xi d^beta_x sigma| divided by the class weight
/// prod_i (1+|xi^i|+|xi|^rho)^{-|alpha^i|} (1+|xi|)^{m + rho |beta|}.
inline ClassReport verify_class_membership(const SymbolSpec& sym, int max_order, const ProbeOptions& opt = {}) {
  if (max_order < 0 || max_order > 3) throw DomainError("derivative order capped at 3");
  const auto& shape = sym.shape;
  const int N = shape.total_dim();
  auto idx = detail::multi_indices(2 * N, max_order);
  auto xs = detail::x_probes(N, sym.x_support_radius, opt.x_points, opt.seed);
  double xscale = std::min(1.0, sym.x_support_radius);
  std::vector<double> steps(2 * N);
  for (int k = 0; k < N; ++k) {
    steps[k] = opt.xi_step;
    steps[N + k] = opt.x_step * xscale;
  }

  auto sweep = [&](const std::vector<Vec>& probes, std::vector<double>& sups) {
    sups.assign(idx.size(), 0.0);
    for (const auto& x : xs) {
      for (const auto& xi : probes) {
        Vec z(2 * N);
        z.head(N) = xi;
        z.tail(N) = x;
        auto f = [&](const Vec& p) { return eval_symbol(sym, Vec(p.tail(N)), Vec(p.head(N))); };
        double r = xi.norm();
        for (std::size_t e = 0; e < idx.size(); ++e) {
          const auto& g = idx[e];
          double w = std::pow(1.0 + r, sym.order);
          int bsum = 0;
          for (int k = 0; k < N; ++k) bsum += g[N + k];
          w *= std::pow(1.0 + r, sym.rho * bsum);
          for (int i = 0; i < shape.blocks(); ++i) {
            int ai = 0;
            for (int k = 0; k < shape.dim(i); ++k) ai += g[shape.offset(i) + k];
            if (ai) w *= std::pow(1.0 + shape.block(xi, i).norm() + std::pow(r, sym.rho), -ai);
          }
          double d = std::abs(detail::tensor_difference(f, z, g, steps));
          double ratio = d / w;
          if (!std::isfinite(ratio)) ratio = std::numeric_limits<double>::infinity();
          sups[e] = std::max(sups[e], ratio);
        }
      }
    }
  };

  ClassReport rep;
  rep.cap = opt.cap;
  std::vector<double> coarse, fine;
  sweep(detail::frequency_probes(shape, opt.max_octave, opt.directions, 1.0), coarse);
  if (opt.refine) {
    int dirs = opt.directions > 0 ? 2 * opt.directions : 0;
    if (dirs == 0) dirs = N == 1 ? 2 : (N == 2 ? 32 : 24 * N);
    sweep(detail::frequency_probes(shape, opt.max_octave + 1, dirs, 0.5), fine);
  } else {
    fine = coarse;
  }
  for (std::size_t e = 0; e < idx.size(); ++e) {
    ClassEntry ce;
    ce.alpha.assign(idx[e].begin(), idx[e].begin() + N);
    ce.beta.assign(idx[e].begin() + N, idx[e].end());
    ce.sup_ratio = coarse[e];
    ce.refined_sup_ratio = fine[e];
    rep.max_ratio = std::max(rep.max_ratio, std::max(coarse[e], fine[e]));
    if (!std::isfinite(coarse[e]) || !std::isfinite(fine[e])) rep.finite = false;
    // ratios far below the zeroth-order one are difference roundoff
    if (fine[e] > 1.1 * coarse[e] && fine[e] > 1e-6 * coarse[0]) rep.stable = false;
    rep.entries.push_back(std::move(ce));
  }
  rep.pass = rep.finite && rep.stable && rep.max_ratio <= rep.cap;
  return rep;
}

struct MarcinkiewiczEntry {
  std::vector<int> alpha;
  double sup = 0.0;
  double refined_sup = 0.0;
};

struct MarcinkiewiczReport {
  std::vector<MarcinkiewiczEntry> entries;
  double max_value = 0.0;
  bool pass = false;
};

/// Sup of |(xi d/dxi)^alpha sigma| (componentwise) over probes, computed by
/// differences in the logarithmic coordinates xi_k = xi_k0 e^{u_k}.
inline MarcinkiewiczReport verify_marcinkiewicz(const SymbolSpec& sym, int max_order, const ProbeOptions& opt = {}) {
  if (max_order < 0 || max_order > 3) throw DomainError("derivative order capped at 3");
  const int N = sym.shape.total_dim();
  auto idx = detail::multi_indices(N, max_order);
  auto xs = detail::x_probes(N, sym.x_support_radius, opt.x_points, opt.seed);
  std::vector<double> steps(N, 0.02);
  auto sweep = [&](const std::vector<Vec>& probes, std::vector<double>& sups) {
    sups.assign(idx.size(), 0.0);
    for (const auto& x : xs) {
      for (const auto& xi : probes) {
        auto f = [&](const Vec& u) {
          Vec p(N);
          for (int k = 0; k < N; ++k) p[k] = xi[k] * std::exp(u[k]);
          return eval_symbol(sym, x, p);
        };
        Vec u0 = Vec::Zero(N);
        for (std::size_t e = 0; e < idx.size(); ++e) {
          // a vanishing coordinate is a fixed point of xi_k d/dxi_k
          bool zero = false;
          for (int k = 0; k < N; ++k)
            if (idx[e][k] > 0 && xi[k] == 0.0) zero = true;
          if (zero) continue;
          sups[e] = std::max(sups[e], std::abs(detail::tensor_difference(f, u0, idx[e], steps)));
        }
      }
    }
  };
  MarcinkiewiczReport rep;
  std::vector<double> coarse, fine;
  sweep(detail::frequency_probes(sym.shape, opt.max_octave, opt.directions, 1.0), coarse);
  int dirs = opt.directions > 0 ? 2 * opt.directions : (N == 1 ? 2 : (N == 2 ? 32 : 24 * N));
  if (opt.refine)
    sweep(detail::frequency_probes(sym.shape, opt.max_octave + 1, dirs, 0.5), fine);
  else
    fine = coarse;
  bool ok = true;
  for (std::size_t e = 0; e < idx.size(); ++e) {
    rep.entries.push_back({idx[e], coarse[e], fine[e]});
    rep.max_value = std::max(rep.max_value, std::max(coarse[e], fine[e]));
    if (!std::isfinite(fine[e]) || (fine[e] > 1.1 * coarse[e] && fine[e] > 1e-6 * coarse[0])) ok = false;
  }
  rep.pass = ok && rep.max_value <= opt.cap;
  return rep;
}

}  // namespace pfio
