#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "pfio/error.hpp"
#include "pfio/grid.hpp"
#include "pfio/mollifier.hpp"
#include "pfio/phase.hpp"
#include "pfio/types.hpp"

namespace pfio {

/// Unit vectors in R^dim with spacing about 2^{-level/2}.
struct SphericalNet {
  int dim = 2;
  int level = 1;
  std::vector<Vec> points;

  double spacing() const { return std::exp2(-0.5 * level); }
  // cones and bumps have angular radius 2 * spacing
  double cone_radius() const { return 2.0 * spacing(); }
  std::size_t size() const { return points.size(); }
};

inline std::size_t net_count(int dim, int level) {
  if (dim == 2) return static_cast<std::size_t>(std::ceil(kTwoPi * std::exp2(0.5 * level)));
  if (dim == 3) return static_cast<std::size_t>(std::ceil(4.0 * kPi * std::exp2(level)));
  throw DomainError("sphere nets are implemented for block dimensions 2 and 3");
}

inline SphericalNet build_net(int dim, int level) {
  if (dim < 2) throw DomainError("blocks of dimension 1 carry no sphere net");
  if (level < 1) throw DomainError("net level must be >= 1");
  SphericalNet net;
  net.dim = dim;
  net.level = level;
  net.points = direction_net(dim, static_cast<int>(net_count(dim, level)));
  return net;
}

namespace detail {

inline double cone_weight(const SphericalNet& net, const Vec& u, const Vec& nu) {
  return bump((u - nu).norm() / net.cone_radius());
}

// indices of net points whose cone can contain direction u
inline std::vector<std::size_t> cone_candidates(const SphericalNet& net, const Vec& u) {
  std::vector<std::size_t> out;
  const std::size_t K = net.size();
  if (net.dim == 2 && K > 8) {
    // chord 2 * spacing corresponds to an angle below 2.1 * spacing
    double ang = std::atan2(u[1], u[0]);
    if (ang < 0) ang += kTwoPi;
    double step = kTwoPi / K;
    long c = std::lround(ang / step);
    long w = static_cast<long>(std::ceil(2.2 * net.cone_radius() / step)) + 1;
    if (2 * w + 1 >= static_cast<long>(K)) w = (static_cast<long>(K) - 1) / 2;
    for (long d = -w; d <= w; ++d) out.push_back(static_cast<std::size_t>(((c + d) % long(K) + long(K)) % long(K)));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  for (std::size_t k = 0; k < K; ++k) out.push_back(k);
  return out;
}

}  // namespace detail

/// All nonzero chi_nu(xi) as (index, value); the values sum to 1.
inline std::vector<std::pair<std::size_t, double>> chi_all(const SphericalNet& net, const Vec& xi) {
  double r = xi.norm();
  if (r == 0.0) throw SingularArgument("cone cutoff evaluated at xi = 0");
  if (xi.size() != net.dim) throw SizingError("cone cutoff dimension mismatch");
  if (net.size() == 1) return {{0, 1.0}};
  Vec u = xi / r;
  std::vector<std::pair<std::size_t, double>> out;
  double total = 0.0;
  for (std::size_t k : detail::cone_candidates(net, u)) {
    double w = detail::cone_weight(net, u, net.points[k]);
    if (w > 0.0) {
      out.emplace_back(k, w);
      total += w;
    }
  }
  if (total == 0.0) throw Error("sphere net does not cover direction");
  for (auto& p : out) p.second /= total;
  return out;
}

inline double chi_cutoff(const SphericalNet& net, std::size_t nu, const Vec& xi) {
  if (nu >= net.size()) throw DomainError("net index out of range");
  for (const auto& [k, v] : chi_all(net, xi))
    if (k == nu) return v;
  return 0.0;
}

inline double partition_check(const SphericalNet& net, const std::vector<Vec>& probes) {
  double dev = 0.0;
  for (const auto& p : probes) {
    double s = 0.0;
    for (const auto& kv : chi_all(net, p)) s += kv.second;
    dev = std::max(dev, std::abs(s - 1.0));
  }
  return dev;
}

/// psi(xi) = 1 - prod_i (1 - psi0(2 |xi^i|)): 1 if some |xi^i| <= 1/2, 0 if all |xi^i| >= 1.
inline double axis_cutoff(const ProductSpaceShape& shape, const Vec& xi) {
  double p = 1.0;
  for (int i = 0; i < shape.blocks(); ++i) p *= 1.0 - psi0(2.0 * shape.block(xi, i).norm());
  return 1.0 - p;
}

enum class Orientation { forward, dual };

inline const char* to_string(Orientation o) { return o == Orientation::forward ? "forward" : "dual"; }

struct RectangleParams {
  Vec x_o;
  double C_R = 4.0;
  Orientation orientation = Orientation::forward;
};

namespace detail {
inline bool in_rectangle(const Vec& v, const Vec& nu, double C_R, int s) {
  return v.norm() <= C_R * std::exp2(-0.5 * s) && std::abs(v.dot(nu)) <= C_R * std::exp2(-s);
}
}  // namespace detail

/// Forward: v = x_o^i - grad_xi Phi_i(x^i, nu); dual swaps x and x_o.
/// Member iff |v| <= C_R 2^{-s/2} and |v . nu| <= C_R 2^{-s}.
inline bool rectangle_membership(const RectangleParams& rp, const Vec& x, int i, int s, const Vec& nu,
                                 const ProductPhase& phase) {
  if (i < 0 || i >= phase.blocks()) throw DomainError("block index out of range");
  if (phase.shape.dim(i) < 2) throw DomainError("blocks of dimension 1 carry no rectangles");
  const auto& f = phase.factors[i];
  Vec xi = phase.shape.block(x, i), xo = phase.shape.block(rp.x_o, i);
  Vec v = rp.orientation == Orientation::forward ? Vec(xo - f.grad_xi(xi, nu)) : Vec(xi - f.grad_xi(xo, nu));
  return detail::in_rectangle(v, nu, rp.C_R, s);
}

struct InfluenceRegion {
  Vec x_o;
  double delta = 0.0;
  double C_R = 4.0;
  Orientation orientation = Orientation::forward;
  int s_min = 0;
  int s_max = 0;
  std::vector<int> blocks;            // U: blocks with dimension >= 2
  std::vector<std::uint8_t> indicator;  // over the physical grid
  std::size_t rectangles = 0;
  double mc_measure = 0.0;
  double mc_stderr = 0.0;
  std::size_t mc_samples = 0;

  double grid_measure(const GridSpec& g) const {
    std::size_t c = 0;
    for (auto b : indicator) c += b;
    return c * g.cell_volume();
  }
};

inline int region_s_min(double delta) { return static_cast<int>(std::ceil(std::log2(1.0 / delta) - 1e-12)); }

// finest level at which a rectangle is still at least one cell thick
inline int region_s_max_for_grid(const GridSpec& g, double C_R) {
  double h = 0.0;
  for (int a = 0; a < g.dim(); ++a) h = std::max(h, g.spacing(a));
  return static_cast<int>(std::ceil(std::log2(2.0 * C_R / h)));
}

/// Exact membership in the union of rectangles with s_min <= s <= s_max.
inline bool region_contains(const InfluenceRegion& reg, const ProductPhase& phase, const Vec& x) {
  for (int i : reg.blocks) {
    const auto& f = phase.factors[i];
    Vec xi = phase.shape.block(x, i), xo = phase.shape.block(reg.x_o, i);
    for (int s = reg.s_min; s <= reg.s_max; ++s) {
      SphericalNet net = build_net(phase.shape.dim(i), s);
      const double A = reg.C_R * std::exp2(-0.5 * s);
      for (const auto& nu : net.points) {
        Vec v = reg.orientation == Orientation::forward ? Vec(xo - f.grad_xi(xi, nu)) : Vec(xi - f.grad_xi(xo, nu));
        if (v.norm() > A) continue;
        if (detail::in_rectangle(v, nu, reg.C_R, s)) return true;
      }
    }
  }
  return false;
}

struct RegionOptions {
  double C_R = 4.0;
  int s_max = -1;  // -1: chosen from the grid spacing
  std::size_t mc_samples = 20000;
  std::uint64_t seed = 17;
};

/// Indicator of B*_delta on the grid plus a Monte-Carlo measure over the grid box.
inline InfluenceRegion region_of_influence(const GridSpec& g, const ProductPhase& phase, const Vec& x_o, double delta,
                                           Orientation orientation, const RegionOptions& opt = {}) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  if (!(g.shape == phase.shape)) throw SizingError("grid and phase shapes differ");
  const auto& shape = phase.shape;
  InfluenceRegion reg;
  reg.x_o = x_o;
  reg.delta = delta;
  reg.C_R = opt.C_R;
  reg.orientation = orientation;
  for (int i = 0; i < shape.blocks(); ++i)
    if (shape.dim(i) >= 2) reg.blocks.push_back(i);
  if (reg.blocks.empty()) throw PreconditionError("region of influence needs a block of dimension >= 2");
  reg.s_min = region_s_min(delta);
  reg.s_max = opt.s_max >= 0 ? opt.s_max : region_s_max_for_grid(g, opt.C_R);
  reg.s_max = std::max(reg.s_max, reg.s_min);
  reg.indicator.assign(g.size(), 0);

  for (int i : reg.blocks) {
    const int off = shape.offset(i), d = shape.dim(i);
    const auto& f = phase.factors[i];
    std::vector<int> sub(g.samples.begin() + off, g.samples.begin() + off + d);
    std::size_t bsize = 1;
    for (int m : sub) bsize *= m;
    std::vector<std::uint8_t> bmask(bsize, 0);
    Vec xo = shape.block(x_o, i);
    const bool explicit_center = orientation == Orientation::dual || f.linear_in_x();
    for (int s = reg.s_min; s <= reg.s_max; ++s) {
      SphericalNet net = build_net(d, s);
      const double A = opt.C_R * std::exp2(-0.5 * s);
      for (const auto& nu : net.points) {
        ++reg.rectangles;
        if (explicit_center) {
          // v = +-(x^i - c) with c fixed, so scan the bounding box of |x^i - c| <= A
          Vec c = orientation == Orientation::dual ? f.grad_xi(xo, nu)
                                                    : Vec(xo - f.grad_xi(Vec(Vec::Zero(d)), nu));
          std::vector<int> lo(d), hi(d);
          bool empty = false;
          for (int a = 0; a < d; ++a) {
            double h = g.spacing(off + a);
            lo[a] = std::max(0, static_cast<int>(std::ceil((c[a] - A) / h)) + sub[a] / 2);
            hi[a] = std::min(sub[a] - 1, static_cast<int>(std::floor((c[a] + A) / h)) + sub[a] / 2);
            if (lo[a] > hi[a]) empty = true;
          }
          if (empty) continue;
          std::vector<int> k(lo);
          Vec p(d);
          while (true) {
            std::size_t flat = 0;
            for (int a = 0; a < d; ++a) {
              p[a] = g.coord(off + a, k[a]);
              flat = flat * sub[a] + k[a];
            }
            if (!bmask[flat] && detail::in_rectangle(Vec(p - c), nu, opt.C_R, s)) bmask[flat] = 1;
            int a = d - 1;
            for (; a >= 0; --a) {
              if (++k[a] <= hi[a]) break;
              k[a] = lo[a];
            }
            if (a < 0) break;
          }
        }
      }
    }
    if (!explicit_center) {
      // generic forward phases: test every block-lattice point
      std::vector<int> idx(d, 0);
      Vec p(d);
      for (std::size_t flat = 0; flat < bsize; ++flat) {
        std::size_t rem = flat;
        for (int a = d - 1; a >= 0; --a) {
          idx[a] = static_cast<int>(rem % sub[a]);
          rem /= sub[a];
          p[a] = g.coord(off + a, idx[a]);
        }
        bool hit = false;
        for (int s = reg.s_min; s <= reg.s_max && !hit; ++s) {
          SphericalNet net = build_net(d, s);
          for (const auto& nu : net.points)
            if (detail::in_rectangle(Vec(xo - f.grad_xi(p, nu)), nu, opt.C_R, s)) {
              hit = true;
              break;
            }
        }
        bmask[flat] = hit;
      }
    }
    // broadcast the block mask over the full grid
    const int n = g.dim();
    std::vector<int> idx(n, 0);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      std::size_t bf = 0;
      for (int a = 0; a < d; ++a) bf = bf * sub[a] + idx[off + a];
      if (bmask[bf]) reg.indicator[flat] = 1;
      for (int a = n - 1; a >= 0; --a) {
        if (++idx[a] < g.samples[a]) break;
        idx[a] = 0;
      }
    }
  }

  if (opt.mc_samples > 0) {
    std::mt19937_64 rng(opt.seed);
    double vol = 1.0;
    for (int a = 0; a < g.dim(); ++a) vol *= 2.0 * g.half_width[a];
    std::size_t hits = 0;
    for (std::size_t k = 0; k < opt.mc_samples; ++k) {
      Vec x(g.dim());
      for (int a = 0; a < g.dim(); ++a) {
        std::uniform_real_distribution<double> u(-g.half_width[a], g.half_width[a]);
        x[a] = u(rng);
      }
      if (region_contains(reg, phase, x)) ++hits;
    }
    double frac = static_cast<double>(hits) / opt.mc_samples;
    reg.mc_samples = opt.mc_samples;
    reg.mc_measure = vol * frac;
    reg.mc_stderr = vol * std::sqrt(frac * (1.0 - frac) / opt.mc_samples);
  }
  return reg;
}

/// phi_i(x, xi) = Phi_i(x, xi) - grad_xi Phi_i(x, xi*) . xi
inline double corrected_phase(const PhaseFactor& f, const Vec& x, const Vec& xi, const Vec& xi_star) {
  if (xi.norm() == 0.0) throw SingularArgument("corrected phase at xi = 0");
  return f.eval(x, xi) - f.grad_xi(x, xi_star).dot(xi);
}

struct CorrectedPhaseDecay {
  std::vector<int> levels;
  std::vector<double> d_tau1, d_tau2, d_eta1, d_eta2;  // sup magnitudes per level
};

/// Sup of tau/eta derivatives of the corrected phase over the cone of
/// direction xi* = e_1 and the shell |xi| in [2^{s-1}, 2^{s+1}], in adapted
/// coordinates xi = tau e_1 + eta.
inline CorrectedPhaseDecay corrected_phase_decay(const PhaseFactor& f, const Vec& x, const std::vector<int>& levels,
                                                 int samples = 200, std::uint64_t seed = 23) {
  const int d = f.dim;
  if (d < 2) throw DomainError("corrected phase decay needs a block of dimension >= 2");
  Vec e = Vec::Zero(d);
  e[0] = 1.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ur(-1.0, 1.0), uu(0.0, 1.0);
  CorrectedPhaseDecay out;
  for (int s : levels) {
    const double cone = 2.0 * std::exp2(-0.5 * s);
    const double ht = 0.01 * std::exp2(s), he = 0.01 * std::exp2(0.5 * s);
    double t1 = 0, t2 = 0, e1 = 0, e2 = 0;
    auto ph = [&](double tau, const Vec& eta) {
      Vec xi(d);
      xi[0] = tau;
      xi.tail(d - 1) = eta;
      return corrected_phase(f, x, xi, e);
    };
    for (int k = 0; k < samples; ++k) {
      double r = std::exp2(s + ur(rng));
      Vec dir(d - 1);
      for (int a = 0; a < d - 1; ++a) dir[a] = nd(rng);
      dir /= dir.norm();
      // unit vector at chord distance below the cone radius from e_1
      double ang = 2.0 * std::asin(std::min(1.0, 0.5 * cone * uu(rng)));
      double tau = r * std::cos(ang);
      Vec eta = r * std::sin(ang) * dir;
      double p0 = ph(tau, eta);
      t1 = std::max(t1, std::abs((ph(tau + ht, eta) - ph(tau - ht, eta)) / (2 * ht)));
      t2 = std::max(t2, std::abs((ph(tau + ht, eta) - 2 * p0 + ph(tau - ht, eta)) / (ht * ht)));
      double g2 = 0.0, hfro = 0.0;
      for (int a = 0; a < d - 1; ++a) {
        Vec ep = eta, em = eta;
        ep[a] += he;
        em[a] -= he;
        double ga = (ph(tau, ep) - ph(tau, em)) / (2 * he);
        g2 += ga * ga;
        for (int b = 0; b < d - 1; ++b) {
          Vec pp = eta, pm = eta, mp = eta, mm = eta;
          pp[a] += he; pp[b] += he;
          pm[a] += he; pm[b] -= he;
          mp[a] -= he; mp[b] += he;
          mm[a] -= he; mm[b] -= he;
          double hab = (ph(tau, pp) - ph(tau, pm) - ph(tau, mp) + ph(tau, mm)) / (4 * he * he);
          hfro += hab * hab;
        }
      }
      e1 = std::max(e1, std::sqrt(g2));
      e2 = std::max(e2, std::sqrt(hfro));
    }
    out.levels.push_back(s);
    out.d_tau1.push_back(t1);
    out.d_tau2.push_back(t2);
    out.d_eta1.push_back(e1);
    out.d_eta2.push_back(e2);
  }
  return out;
}

}  // namespace pfio
