#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "pfio/angular.hpp"
#include "pfio/error.hpp"
#include "pfio/grid.hpp"
#include "pfio/littlewood_paley.hpp"
#include "pfio/mollifier.hpp"
#include "pfio/phase.hpp"
#include "pfio/symbol.hpp"
#include "pfio/types.hpp"

namespace pfio {

using Multiplier = std::function<Complex(const Vec&)>;

/// (Ff)(x) = sum_xi e^{2 pi i Phi(x,xi)} sigma(x,xi) w(xi) fhat(xi) dxi^N, where
/// w is a per-block Nyquist taper times (1 - psi) when low_cut is set.
struct FioSpec {
  ProductPhase phase;
  SymbolSpec symbol;
  GridSpec grid;
  bool low_cut = true;
  bool taper = true;
  double taper_plateau = 0.8;
};

inline void validate(const FioSpec& s) {
  if (!(s.phase.shape == s.symbol.shape) || !(s.phase.shape == s.grid.shape))
    throw SizingError("phase, symbol and grid must share one product shape");
  if (!(s.taper_plateau > 0.0 && s.taper_plateau < 1.0)) throw DomainError("taper plateau must lie in (0,1)");
}

inline double frequency_weight(const FioSpec& s, const Vec& xi) {
  const auto& shape = s.grid.shape;
  double w = 1.0;
  if (s.taper)
    for (int i = 0; i < shape.blocks() && w != 0.0; ++i)
      w *= nyquist_taper(shape.block(xi, i).norm(), s.grid.min_nyquist(i), s.taper_plateau);
  if (s.low_cut && w != 0.0) w *= 1.0 - axis_cutoff(shape, xi);
  return w;
}

/// Linear-in-x phase and separable symbol: F is a(x) times a Fourier multiplier.
inline bool uses_fast_path(const FioSpec& s) { return s.phase.linear_in_x() && s.symbol.separable(); }

namespace detail {

inline void check_field(const FioSpec& s, const SampledField& f, Domain d) {
  validate(s);
  if (f.domain != d) throw DomainError("field is in the wrong domain");
  if (f.grid.samples != s.grid.samples || f.grid.half_width != s.grid.half_width || !(f.grid.shape == s.grid.shape))
    throw SizingError("field grid does not match operator grid");
}

// e^{2 pi i h(xi)} eta(xi) w(xi) m(xi) on the dual lattice (fast path only)
inline std::vector<Complex> fast_multiplier(const FioSpec& s, const Multiplier* extra) {
  std::vector<Complex> m(s.grid.size());
  for_each_point(s.grid, Domain::frequency, [&](std::size_t k, const Vec& xi) {
    double w = frequency_weight(s, xi);
    if (w == 0.0) return;
    Complex e = extra ? (*extra)(xi) : Complex(1.0);
    if (e == 0.0) return;
    m[k] = w * e * s.symbol.multiplier(xi) * std::polar(1.0, kTwoPi * s.phase.frequency_part(xi));
  });
  return m;
}

struct FrequencyTerm {
  Vec xi;
  Complex coeff;  // w(xi) m(xi) times the data and dxi^N
};

inline std::vector<FrequencyTerm> collect_terms(const FioSpec& s, const SampledField& data, const Multiplier* extra,
                                                double scale) {
  std::vector<FrequencyTerm> out;
  for_each_point(s.grid, Domain::frequency, [&](std::size_t k, const Vec& xi) {
    if (data.values[k] == 0.0) return;
    double w = frequency_weight(s, xi);
    if (w == 0.0) return;
    Complex e = extra ? (*extra)(xi) : Complex(1.0);
    if (e == 0.0) return;
    out.push_back({xi, w * e * data.values[k] * scale});
  });
  return out;
}

}  // namespace detail

inline SampledField apply_fio_direct(const FioSpec& s, const SampledField& f, const Multiplier* extra = nullptr) {
  detail::check_field(s, f, Domain::physical);
  auto terms = detail::collect_terms(s, forward_transform(f), extra, s.grid.dual_cell_volume());
  SampledField out(s.grid, Domain::physical);
  for_each_point(s.grid, Domain::physical, [&](std::size_t k, const Vec& x) {
    if (x.norm() > s.symbol.x_support_radius) return;
    Complex acc = 0.0;
    for (const auto& t : terms) {
      Complex sig = s.symbol.eval(x, t.xi);
      if (sig == 0.0) continue;
      acc += std::polar(1.0, kTwoPi * s.phase.eval_raw(x, t.xi)) * sig * t.coeff;
    }
    out.values[k] = acc;
  });
  return out;
}

inline SampledField apply_adjoint_direct(const FioSpec& s, const SampledField& g, const Multiplier* extra = nullptr) {
  detail::check_field(s, g, Domain::physical);
  const double hN = s.grid.cell_volume();
  std::vector<std::pair<Vec, Complex>> xs;
  for_each_point(s.grid, Domain::physical, [&](std::size_t k, const Vec& x) {
    if (g.values[k] != 0.0 && x.norm() <= s.symbol.x_support_radius) xs.emplace_back(x, g.values[k] * hN);
  });
  SampledField G(s.grid, Domain::frequency);
  for_each_point(s.grid, Domain::frequency, [&](std::size_t k, const Vec& xi) {
    double w = frequency_weight(s, xi);
    if (w == 0.0) return;
    Complex e = extra ? (*extra)(xi) : Complex(1.0);
    if (e == 0.0) return;
    Complex acc = 0.0;
    for (const auto& [x, gx] : xs) {
      Complex sig = s.symbol.eval(x, xi);
      if (sig == 0.0) continue;
      acc += std::conj(std::polar(1.0, kTwoPi * s.phase.eval_raw(x, xi)) * sig) * gx;
    }
    G.values[k] = std::conj(w * e) * acc;
  });
  return inverse_transform(std::move(G));
}

inline SampledField apply_fio(const FioSpec& s, const SampledField& f, const Multiplier* extra = nullptr) {
  if (!uses_fast_path(s)) return apply_fio_direct(s, f, extra);
  detail::check_field(s, f, Domain::physical);
  auto m = detail::fast_multiplier(s, extra);
  SampledField F = forward_transform(f);
  for (std::size_t k = 0; k < F.size(); ++k) F.values[k] *= m[k];
  SampledField out = inverse_transform(std::move(F));
  for_each_point(s.grid, Domain::physical,
                 [&](std::size_t k, const Vec& x) { out.values[k] *= s.symbol.amplitude(x); });
  return out;
}

/// Discrete adjoint of apply_fio for the Riemann-sum inner product.
inline SampledField apply_adjoint(const FioSpec& s, const SampledField& g, const Multiplier* extra = nullptr) {
  if (!uses_fast_path(s)) return apply_adjoint_direct(s, g, extra);
  detail::check_field(s, g, Domain::physical);
  auto m = detail::fast_multiplier(s, extra);
  SampledField ag = g;
  for_each_point(s.grid, Domain::physical,
                 [&](std::size_t k, const Vec& x) { ag.values[k] *= s.symbol.amplitude(x); });
  SampledField G = forward_transform(std::move(ag));
  for (std::size_t k = 0; k < G.size(); ++k) G.values[k] *= std::conj(m[k]);
  return inverse_transform(std::move(G));
}

enum class KernelTag { omega, omega_t, omega_t_s_nu, omega_sharp, omega_flat };

struct SampledKernel {
  KernelTag tag = KernelTag::omega;
  Vec base;
  SampledField values;  // over the complementary physical grid
};

/// Omega(x, y) for fixed x over the y lattice, with an extra frequency multiplier:
/// sum_xi e^{2 pi i (Phi(x,xi) - y.xi)} sigma(x,xi) w(xi) m(xi) dxi^N.
inline SampledKernel kernel_over_y(const FioSpec& s, const Vec& x, const Multiplier* extra,
                                   KernelTag tag = KernelTag::omega) {
  validate(s);
  SampledKernel K{tag, x, SampledField(s.grid, Domain::physical)};
  if (x.norm() > s.symbol.x_support_radius) return K;
  auto& v = K.values.values;
  for_each_point(s.grid, Domain::frequency, [&](std::size_t k, const Vec& xi) {
    double w = frequency_weight(s, xi);
    if (w == 0.0) return;
    Complex e = extra ? (*extra)(xi) : Complex(1.0);
    if (e == 0.0) return;
    Complex sig = s.symbol.eval(x, xi);
    if (sig == 0.0) return;
    v[k] = w * e * sig * std::polar(1.0, kTwoPi * s.phase.eval_raw(x, xi));
  });
  centered_dft(s.grid, v, -1, s.grid.dual_cell_volume());
  return K;
}

inline SampledKernel kernel_omega_t(const FioSpec& s, const DyadicTuple& tp, const Vec& x) {
  if (!check_hypothesis_H(tp)) throw PreconditionError("hypothesis (H) fails for this tuple");
  const auto& shape = s.grid.shape;
  Multiplier m = [&](const Vec& xi) { return Complex(delta_t(tp, shape, xi)); };
  return kernel_over_y(s, x, &m, KernelTag::omega_t);
}

/// nu holds one net index per block; entries for blocks of dimension 1 are ignored.
/// complement selects the psi-weighted piece instead of the (1 - psi) piece.
inline Multiplier cone_piece_multiplier(const ProductSpaceShape& shape, const DyadicTuple& tp,
                                        const std::vector<int>& s, const std::vector<int>& nu, bool complement) {
  if (static_cast<int>(nu.size()) != shape.blocks()) throw SizingError("one net index per block required");
  std::vector<std::optional<SphericalNet>> nets(shape.blocks());
  for (int i = 0; i < shape.blocks(); ++i) {
    if (shape.dim(i) < 2) continue;
    nets[i] = build_net(shape.dim(i), s[i]);
    if (nu[i] < 0 || nu[i] >= static_cast<int>(nets[i]->size())) throw DomainError("net index out of range");
  }
  return [shape, tp, s, nu, nets, complement](const Vec& xi) {
    double v = delta_t_s(tp, s, shape, xi);
    if (v == 0.0) return Complex(0.0);
    for (int i = 0; i < shape.blocks() && v != 0.0; ++i)
      if (nets[i]) v *= chi_cutoff(*nets[i], static_cast<std::size_t>(nu[i]), Vec(shape.block(xi, i)));
    double p = axis_cutoff(shape, xi);
    return Complex(v * (complement ? p : 1.0 - p));
  };
}

inline SampledKernel kernel_omega_t_s_nu(const FioSpec& s, const DyadicTuple& tp, const std::vector<int>& sv,
                                         const std::vector<int>& nu, const Vec& x, bool complement = false) {
  Multiplier m = cone_piece_multiplier(s.grid.shape, tp, sv, nu, complement);
  return kernel_over_y(s, x, &m, KernelTag::omega_t_s_nu);
}

/// Omega(., y) over the x lattice for fixed y, with an extra multiplier.
/// Fast path: a(x) times one inverse transform; otherwise O(P) per x.
inline SampledField kernel_over_x(const FioSpec& s, const Vec& y, const Multiplier* extra) {
  validate(s);
  if (uses_fast_path(s)) {
    auto m = detail::fast_multiplier(s, extra);
    SampledField G(s.grid, Domain::frequency);
    for_each_point(s.grid, Domain::frequency, [&](std::size_t k, const Vec& xi) {
      if (m[k] != 0.0) G.values[k] = m[k] * std::polar(1.0, -kTwoPi * y.dot(xi));
    });
    SampledField out = inverse_transform(std::move(G));
    for_each_point(s.grid, Domain::physical,
                   [&](std::size_t k, const Vec& x) { out.values[k] *= s.symbol.amplitude(x); });
    return out;
  }
  SampledField delta(s.grid, Domain::frequency);
  for (auto& z : delta.values) z = 1.0;
  auto terms = detail::collect_terms(s, delta, extra, s.grid.dual_cell_volume());
  SampledField out(s.grid, Domain::physical);
  for_each_point(s.grid, Domain::physical, [&](std::size_t k, const Vec& x) {
    if (x.norm() > s.symbol.x_support_radius) return;
    Complex acc = 0.0;
    for (const auto& t : terms) {
      Complex sig = s.symbol.eval(x, t.xi);
      if (sig == 0.0) continue;
      acc += std::polar(1.0, kTwoPi * (s.phase.eval_raw(x, t.xi) - y.dot(t.xi))) * sig * t.coeff;
    }
    out.values[k] = acc;
  });
  return out;
}

/// Omega#(xi, eta) = sum_x e^{2 pi i (Phi(x,eta) - Phi(x,xi))} sigma(x,eta) conj(sigma(x,xi)) h^N
inline Complex kernel_omega_sharp(const FioSpec& s, const Vec& xi, const Vec& eta) {
  validate(s);
  require_nonzero_blocks(s.grid.shape, xi);
  require_nonzero_blocks(s.grid.shape, eta);
  Complex acc = 0.0;
  for_each_point(s.grid, Domain::physical, [&](std::size_t, const Vec& x) {
    if (x.norm() > s.symbol.x_support_radius) return;
    Complex a = s.symbol.eval(x, eta);
    if (a == 0.0) return;
    Complex b = s.symbol.eval(x, xi);
    if (b == 0.0) return;
    acc += std::polar(1.0, kTwoPi * (s.phase.eval_raw(x, eta) - s.phase.eval_raw(x, xi))) * a * std::conj(b);
  });
  return acc * s.grid.cell_volume();
}

/// Omega-flat(x, y) = sum_xi e^{2 pi i (Phi(x,xi) - Phi(y,xi))} sigma(x,xi) conj(sigma(y,xi)) w(xi)^2 dxi^N
inline Complex kernel_omega_flat(const FioSpec& s, const Vec& x, const Vec& y) {
  validate(s);
  Complex acc = 0.0;
  for_each_point(s.grid, Domain::frequency, [&](std::size_t, const Vec& xi) {
    double w = frequency_weight(s, xi);
    if (w == 0.0) return;
    Complex a = eval_symbol(s.symbol, x, xi);
    if (a == 0.0) return;
    Complex b = eval_symbol(s.symbol, y, xi);
    acc += w * w * std::polar(1.0, kTwoPi * (s.phase.eval_raw(x, xi) - s.phase.eval_raw(y, xi))) * a * std::conj(b);
  });
  return acc * s.grid.dual_cell_volume();
}

struct AnalyticFamily {
  double m;
  int N;
  int n;
  Complex gamma(Complex s) const { return -m - s * (0.5 * (N - n)); }
  double theta() const { return -2.0 * m / (N - n); }
  Complex prefactor(Complex s) const { return std::exp((s - theta()) * (s - theta())); }
};

/// F_s: symbol sigma (1+|xi|^2)^{gamma(s)/2}, scaled by e^{(s - theta)^2}.
inline SampledField analytic_family_apply(const FioSpec& spec, Complex s, const SampledField& f) {
  const int N = spec.grid.shape.total_dim(), n = spec.grid.shape.blocks();
  if (N <= n) throw PreconditionError("analytic family needs N > n");
  if (s.real() < 0.0 || s.real() > 1.0) throw DomainError("analytic family parameter needs 0 <= Re s <= 1");
  AnalyticFamily fam{spec.symbol.order, N, n};
  Complex g = fam.gamma(s);
  Multiplier m = [g](const Vec& xi) { return std::exp(0.5 * g * std::log(1.0 + xi.squaredNorm())); };
  SampledField out = apply_fio(spec, f, &m);
  Complex c = fam.prefactor(s);
  for (auto& z : out.values) z *= c;
  return out;
}

}  // namespace pfio
