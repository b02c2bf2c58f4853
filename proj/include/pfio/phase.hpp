#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "pfio/error.hpp"
#include "pfio/grid.hpp"
#include "pfio/mollifier.hpp"
#include "pfio/types.hpp"

namespace pfio {

enum class PhaseKind { linear, translation, half_wave_plus, half_wave_minus, perturbed, custom };

inline const char* to_string(PhaseKind k) {
  switch (k) {
    case PhaseKind::linear: return "linear";
    case PhaseKind::translation: return "translation";
    case PhaseKind::half_wave_plus: return "half_wave_plus";
    case PhaseKind::half_wave_minus: return "half_wave_minus";
    case PhaseKind::perturbed: return "perturbed";
    case PhaseKind::custom: return "custom";
  }
  return "custom";
}

/// One factor Phi_i(x^i, xi^i) of a product phase.
///
/// The evaluators are the raw formulas; they are continuous at xi = 0 for the
/// built-ins but only eval_phase enforces the nonzero-block precondition.
struct PhaseFactor {
  using Scalar = std::function<double(const Vec&, const Vec&)>;
  using Vector = std::function<Vec(const Vec&, const Vec&)>;
  using Matrix = std::function<Mat(const Vec&, const Vec&)>;

  int dim = 1;
  PhaseKind kind = PhaseKind::custom;
  Scalar eval;
  Vector grad_xi;
  Vector grad_x;
  Matrix mixed_hessian;  // optional; empty means finite differences
  // set only when Phi_i = x.xi + h(xi); returns h
  std::function<double(const Vec&)> frequency_part;

  bool linear_in_x() const { return static_cast<bool>(frequency_part); }
};

namespace phases {

namespace detail {
inline Vec unit_or_zero(const Vec& v) {
  double r = v.norm();
  return r > 0.0 ? Vec(v / r) : Vec(Vec::Zero(v.size()));
}
}  // namespace detail

inline PhaseFactor linear(int dim) {
  PhaseFactor f;
  f.dim = dim;
  f.kind = PhaseKind::linear;
  f.eval = [](const Vec& x, const Vec& xi) { return x.dot(xi); };
  f.grad_xi = [](const Vec& x, const Vec&) { return x; };
  f.grad_x = [](const Vec&, const Vec& xi) { return xi; };
  f.mixed_hessian = [dim](const Vec&, const Vec&) { return Mat(Mat::Identity(dim, dim)); };
  f.frequency_part = [](const Vec&) { return 0.0; };
  return f;
}

inline PhaseFactor translation(const Vec& a) {
  PhaseFactor f = linear(static_cast<int>(a.size()));
  f.kind = PhaseKind::translation;
  f.eval = [a](const Vec& x, const Vec& xi) { return (x - a).dot(xi); };
  f.grad_xi = [a](const Vec& x, const Vec&) { return Vec(x - a); };
  f.frequency_part = [a](const Vec& xi) { return -a.dot(xi); };
  return f;
}

/// x.xi + sign |xi|
inline PhaseFactor half_wave(int dim, int sign = +1) {
  const double s = sign >= 0 ? 1.0 : -1.0;
  PhaseFactor f = linear(dim);
  f.kind = sign >= 0 ? PhaseKind::half_wave_plus : PhaseKind::half_wave_minus;
  f.eval = [s](const Vec& x, const Vec& xi) { return x.dot(xi) + s * xi.norm(); };
  f.grad_xi = [s](const Vec& x, const Vec& xi) { return Vec(x + s * detail::unit_or_zero(xi)); };
  f.frequency_part = [s](const Vec& xi) { return s * xi.norm(); };
  return f;
}

/// x.xi + eps g(x) |xi| with g(x) = bump(|x| / radius). No analytic mixed
/// Hessian is attached so the non-degeneracy check goes through differences.
inline PhaseFactor perturbed(int dim, double eps, double radius = 1.0) {
  if (!(std::abs(eps) <= 0.1)) throw DomainError("perturbation size must satisfy |eps| <= 0.1");
  if (!(radius > 0.0)) throw DomainError("perturbation radius must be positive");
  PhaseFactor f;
  f.dim = dim;
  f.kind = PhaseKind::perturbed;
  auto g = [radius](const Vec& x) { return bump(x.norm() / radius); };
  auto grad_g = [radius](const Vec& x) {
    double r = x.norm();
    if (r == 0.0) return Vec(Vec::Zero(x.size()));
    return Vec(bump_derivative(r / radius) / radius * (x / r));
  };
  f.eval = [eps, g](const Vec& x, const Vec& xi) { return x.dot(xi) + eps * g(x) * xi.norm(); };
  f.grad_xi = [eps, g](const Vec& x, const Vec& xi) {
    return Vec(x + eps * g(x) * detail::unit_or_zero(xi));
  };
  f.grad_x = [eps, grad_g](const Vec& x, const Vec& xi) { return Vec(xi + eps * xi.norm() * grad_g(x)); };
  return f;
}

inline PhaseFactor custom(int dim, PhaseFactor::Scalar eval, PhaseFactor::Vector grad_xi,
                          PhaseFactor::Vector grad_x) {
  PhaseFactor f;
  f.dim = dim;
  f.kind = PhaseKind::custom;
  f.eval = std::move(eval);
  f.grad_xi = std::move(grad_xi);
  f.grad_x = std::move(grad_x);
  return f;
}

}  // namespace phases

/// Phi(x, xi) = sum_i Phi_i(x^i, xi^i).
struct ProductPhase {
  ProductSpaceShape shape;
  std::vector<PhaseFactor> factors;

  static ProductPhase make(std::vector<PhaseFactor> factors) {
    std::vector<int> dims;
    for (const auto& f : factors) dims.push_back(f.dim);
    ProductPhase p;
    p.shape = ProductSpaceShape::make(dims);
    p.factors = std::move(factors);
    return p;
  }

  // same factor kind on every block of shape
  template <class Builder>
  static ProductPhase uniform(const ProductSpaceShape& shape, Builder&& build) {
    std::vector<PhaseFactor> fs;
    for (int i = 0; i < shape.blocks(); ++i) fs.push_back(build(shape.dim(i)));
    return make(std::move(fs));
  }

  int blocks() const { return shape.blocks(); }

  double eval_raw(const Vec& x, const Vec& xi) const {
    double s = 0.0;
    for (int i = 0; i < blocks(); ++i) s += factors[i].eval(shape.block(x, i), shape.block(xi, i));
    return s;
  }
  Vec grad_xi(const Vec& x, const Vec& xi) const {
    Vec g(shape.total_dim());
    for (int i = 0; i < blocks(); ++i)
      shape.block(g, i) = factors[i].grad_xi(shape.block(x, i), shape.block(xi, i));
    return g;
  }
  Vec grad_x(const Vec& x, const Vec& xi) const {
    Vec g(shape.total_dim());
    for (int i = 0; i < blocks(); ++i)
      shape.block(g, i) = factors[i].grad_x(shape.block(x, i), shape.block(xi, i));
    return g;
  }
  bool linear_in_x() const {
    return std::all_of(factors.begin(), factors.end(), [](const PhaseFactor& f) { return f.linear_in_x(); });
  }
  // h(xi) = sum_i h_i(xi^i); only meaningful when linear_in_x()
  double frequency_part(const Vec& xi) const {
    double s = 0.0;
    for (int i = 0; i < blocks(); ++i) s += factors[i].frequency_part(shape.block(xi, i));
    return s;
  }
};

inline void require_nonzero_blocks(const ProductSpaceShape& shape, const Vec& xi) {
  for (int i = 0; i < shape.blocks(); ++i)
    if (shape.block(xi, i).squaredNorm() == 0.0)
      throw SingularArgument("frequency block " + std::to_string(i) + " is zero");
}

inline double eval_phase(const ProductPhase& phase, const Vec& x, const Vec& xi) {
  if (x.size() != phase.shape.total_dim() || xi.size() != phase.shape.total_dim())
    throw SizingError("point dimension does not match phase");
  require_nonzero_blocks(phase.shape, xi);
  return phase.eval_raw(x, xi);
}

namespace detail {

inline Vec random_nonzero(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> nd;
  Vec v(dim);
  do {
    for (int k = 0; k < dim; ++k) v[k] = nd(rng);
  } while (v.norm() < 1e-3);
  return v;
}

inline Vec random_box(std::mt19937_64& rng, int dim, double half) {
  std::uniform_real_distribution<double> u(-half, half);
  Vec v(dim);
  for (int k = 0; k < dim; ++k) v[k] = u(rng);
  return v;
}

}  // namespace detail

struct HomogeneityReport {
  bool pass = true;
  double max_eval_violation = 0.0;  // relative
  double max_grad_violation = 0.0;  // relative
  std::size_t samples = 0;
};

inline HomogeneityReport check_homogeneity(const PhaseFactor& f, int sample_count,
                                           const std::vector<double>& lambdas, double tol = 1e-9,
                                           std::uint64_t seed = 1) {
  for (double l : lambdas)
    if (!(l > 0.0)) throw DomainError("homogeneity scales must be positive");
  std::mt19937_64 rng(seed);
  HomogeneityReport rep;
  for (int k = 0; k < sample_count; ++k) {
    Vec x = detail::random_box(rng, f.dim, 2.0);
    Vec xi = detail::random_nonzero(rng, f.dim) * 4.0;
    double v = f.eval(x, xi);
    Vec g = f.grad_xi(x, xi);
    for (double l : lambdas) {
      Vec lxi = l * xi;
      double vl = f.eval(x, lxi);
      double scale = std::max(std::abs(l * v), l * xi.norm() * (1.0 + x.norm()));
      rep.max_eval_violation = std::max(rep.max_eval_violation, std::abs(vl - l * v) / scale);
      Vec gl = f.grad_xi(x, lxi);
      double gs = std::max(g.norm(), 1.0);
      rep.max_grad_violation = std::max(rep.max_grad_violation, (gl - g).norm() / gs);
      ++rep.samples;
    }
  }
  rep.pass = rep.max_eval_violation <= tol && rep.max_grad_violation <= tol;
  return rep;
}

inline Mat mixed_hessian_fd(const PhaseFactor& f, const Vec& x, const Vec& xi, double h) {
  const int d = f.dim;
  Mat H(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      Vec xp = x, xm = x, ep = xi, em = xi;
      xp[j] += h;
      xm[j] -= h;
      ep[k] += h;
      em[k] -= h;
      H(j, k) = (f.eval(xp, ep) - f.eval(xp, em) - f.eval(xm, ep) + f.eval(xm, em)) / (4.0 * h * h);
    }
  }
  return H;
}

struct NondegeneracyReport {
  bool pass = true;
  double min_abs_det = std::numeric_limits<double>::infinity();
  bool used_finite_differences = false;
};

inline NondegeneracyReport check_nondegeneracy(const PhaseFactor& f, const std::vector<Vec>& x_samples,
                                               const std::vector<Vec>& directions, double threshold = 1e-6,
                                               double fd_step = 1e-4) {
  NondegeneracyReport rep;
  rep.used_finite_differences = !f.mixed_hessian;
  for (const auto& e : directions) {
    if (e.size() != f.dim) throw SizingError("direction dimension mismatch");
    if (e.squaredNorm() == 0.0) throw SingularArgument("zero frequency direction");
    for (const auto& x : x_samples) {
      Mat H = f.mixed_hessian ? f.mixed_hessian(x, e) : mixed_hessian_fd(f, x, e, fd_step);
      rep.min_abs_det = std::min(rep.min_abs_det, std::abs(H.determinant()));
    }
  }
  rep.pass = rep.min_abs_det >= threshold;
  return rep;
}

/// Unit directions in R^dim: {+-1} for dim 1, equal angles on the circle,
/// a Fibonacci lattice for dim >= 3 (count points each).
inline std::vector<Vec> direction_net(int dim, int count) {
  if (count < 1) throw SizingError("direction count must be at least 1");
  std::vector<Vec> out;
  if (dim == 1) {
    Vec p(1), m(1);
    p[0] = 1.0;
    m[0] = -1.0;
    out.push_back(p);
    if (count > 1) out.push_back(m);
    return out;
  }
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      double t = kTwoPi * k / count;
      Vec v(2);
      v << std::cos(t), std::sin(t);
      out.push_back(v);
    }
    return out;
  }
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    double z = 1.0 - (2.0 * k + 1.0) / count;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    Vec v = Vec::Zero(dim);
    v[0] = r * std::cos(golden * k);
    v[1] = r * std::sin(golden * k);
    v[2] = z;
    out.push_back(v);
  }
  return out;
}

/// Samples of { grad_xi Phi(x, xi) } over a product of direction nets.
/// radius dilates the nets; the output does not depend on it.
inline std::vector<Vec> sample_singular_locus(const ProductPhase& phase, const Vec& x, int direction_count,
                                              double radius = 1.0) {
  const int n = phase.blocks();
  std::vector<std::vector<Vec>> per_block(n);
  for (int i = 0; i < n; ++i) {
    const auto& f = phase.factors[i];
    Vec xi_block = phase.shape.block(x, i);
    for (const auto& e : direction_net(f.dim, direction_count))
      per_block[i].push_back(f.grad_xi(xi_block, Vec(radius * e)));
  }
  std::vector<Vec> out;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    Vec p(phase.shape.total_dim());
    for (int i = 0; i < n; ++i) phase.shape.block(p, i) = per_block[i][idx[i]];
    out.push_back(p);
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++idx[i] < per_block[i].size()) break;
      idx[i] = 0;
    }
    if (i < 0) break;
  }
  return out;
}

struct ConeSeparationReport {
  bool pass = false;
  double min_ratio = std::numeric_limits<double>::infinity();
  std::size_t pairs = 0;
  std::size_t skipped = 0;
};

/// min over xi, eta in { |xi_perp| <= c |xi| } of |grad_x(Phi(x,xi) - Phi(x,eta))| / |xi - eta|.
inline ConeSeparationReport verify_cone_separation(const ProductPhase& phase, const Vec& axis, double aperture,
                                                   int sample_count, std::uint64_t seed = 7,
                                                   double x_half = 1.0) {
  if (!(aperture > 0.0 && aperture < 1.0)) throw DomainError("cone aperture must lie in (0,1)");
  const int n = phase.shape.total_dim();
  if (axis.size() != n || axis.norm() == 0.0) throw SizingError("bad cone axis");
  Vec e = axis / axis.norm();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logr(0.0, 4.0);
  std::uniform_real_distribution<double> uf(0.0, 1.0);
  auto draw = [&]() {
    // perpendicular part of length <= c * |along|
    Vec g = detail::random_nonzero(rng, n);
    Vec perp = g - g.dot(e) * e;
    double r = std::exp2(logr(rng));
    if (perp.norm() > 0.0) perp *= aperture * uf(rng) / perp.norm();
    Vec v = e + perp;
    return Vec(v * (r / v.norm()));
  };
  ConeSeparationReport rep;
  for (int k = 0; k < sample_count; ++k) {
    Vec xi = draw(), eta = draw();
    double d = (xi - eta).norm();
    if (d < 1e-12) {
      ++rep.skipped;
      continue;
    }
    bool singular = false;
    for (int i = 0; i < phase.blocks(); ++i)
      if (phase.shape.block(xi, i).norm() == 0.0 || phase.shape.block(eta, i).norm() == 0.0) singular = true;
    if (singular) {
      ++rep.skipped;
      continue;
    }
    Vec x = detail::random_box(rng, n, x_half);
    double num = (phase.grad_x(x, xi) - phase.grad_x(x, eta)).norm();
    rep.min_ratio = std::min(rep.min_ratio, num / d);
    ++rep.pairs;
  }
  rep.pass = rep.pairs > 0 && rep.min_ratio >= 1e-3;
  return rep;
}

}  // namespace pfio
