#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "pfio/error.hpp"
#include "pfio/grid.hpp"
#include "pfio/mollifier.hpp"
#include "pfio/phase.hpp"
#include "pfio/symbol.hpp"
#include "pfio/types.hpp"

namespace pfio {

/// t = (t_1..t_n) with t_i >= 1 and the mixing exponent rho; q = 1/rho.
struct DyadicTuple {
  std::vector<int> t;
  double rho = 0.0;

  static DyadicTuple make(std::vector<int> t, double rho) {
    if (t.empty()) throw SizingError("dyadic tuple needs at least one entry");
    for (int v : t)
      if (v < 1) throw DomainError("dyadic tuple entries must be >= 1");
    if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0,1)");
    return DyadicTuple{std::move(t), rho};
  }

  int size() const { return static_cast<int>(t.size()); }
  double q() const { return rho == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / rho; }
  int max() const { return *std::max_element(t.begin(), t.end()); }
};

struct IndexPartition {
  std::vector<int> I;  // 0-based, ascending
  std::vector<int> J;
  int imax = -1;  // element of I with the largest t
};

inline void require_tuple_shape(const DyadicTuple& tp, const ProductSpaceShape& shape) {
  if (tp.size() != shape.blocks()) throw SizingError("tuple length must equal the number of blocks");
}

/// Block i scaled by 2^{-t_i}, every other block by 2^{-q t_i} (0 when rho = 0).
inline Vec nonisotropic_dilate(const DyadicTuple& tp, const ProductSpaceShape& shape, int i, const Vec& xi) {
  require_tuple_shape(tp, shape);
  if (i < 0 || i >= shape.blocks()) throw DomainError("factor index out of range");
  Vec out(xi.size());
  double own = std::exp2(-tp.t[i]);
  double other = tp.rho == 0.0 ? 0.0 : std::exp2(-tp.q() * tp.t[i]);
  for (int k = 0; k < shape.blocks(); ++k) shape.block(out, k) = shape.block(xi, k) * (k == i ? own : other);
  return out;
}

/// delta_t(xi) = prod_i phi(|t_i xi|).
inline double delta_t(const DyadicTuple& tp, const ProductSpaceShape& shape, const Vec& xi) {
  require_tuple_shape(tp, shape);
  const double q = tp.q();
  double v = 1.0;
  for (int i = 0; i < shape.blocks() && v != 0.0; ++i) {
    double own = std::exp2(-tp.t[i]);
    double r2 = shape.block(xi, i).squaredNorm() * own * own;
    if (tp.rho != 0.0) {
      double other = std::exp2(-q * tp.t[i]);
      for (int k = 0; k < shape.blocks(); ++k)
        if (k != i) r2 += shape.block(xi, k).squaredNorm() * other * other;
    }
    v *= bump_phi(std::sqrt(r2));
  }
  return v;
}

/// Strict inequality: some t_i > (2 + 2 log2 n) / (q - 1). Always true when rho = 0.
inline bool check_hypothesis_H(const DyadicTuple& tp) {
  if (tp.rho == 0.0) return true;
  const double n = tp.size();
  const double thr = (2.0 + 2.0 * std::log2(n)) / (tp.q() - 1.0);
  return std::any_of(tp.t.begin(), tp.t.end(), [thr](int v) { return v > thr; });
}

inline double partition_slack(int n) { return 2.0 + std::log2(static_cast<double>(n)); }

/// Sort t ascending, take the least sorted position k with
/// t_max < q t_(k) - (2 + log2 n); I is that position and everything above it.
inline IndexPartition partition_index_sets(const DyadicTuple& tp) {
  if (!check_hypothesis_H(tp)) throw PreconditionError("hypothesis (H) fails for this tuple");
  const int n = tp.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return tp.t[a] < tp.t[b]; });
  const double tmax = tp.max();
  const double c = partition_slack(n);
  const double q = tp.q();
  int k = -1;
  for (int pos = 0; pos < n; ++pos) {
    if (std::isinf(q) || tmax < q * tp.t[perm[pos]] - c) {
      k = pos;
      break;
    }
  }
  if (k < 0) throw PreconditionError("no admissible split position");
  IndexPartition part;
  for (int pos = 0; pos < n; ++pos) (pos >= k ? part.I : part.J).push_back(perm[pos]);
  std::sort(part.I.begin(), part.I.end());
  std::sort(part.J.begin(), part.J.end());
  part.imax = part.I.front();
  for (int i : part.I)
    if (tp.t[i] > tp.t[part.imax]) part.imax = i;
  return part;
}

/// Both split conditions with c = 2 + log2 n:
/// (t_a + c)/q < t_b < q t_a - c for all a, b in I, and q t_j - c <= t_imax for j in J.
inline bool partition_conditions_hold(const DyadicTuple& tp, const IndexPartition& part) {
  const int n = tp.size();
  if (static_cast<int>(part.I.size() + part.J.size()) != n || part.I.empty()) return false;
  std::vector<int> seen(n, 0);
  for (int i : part.I) ++seen.at(i);
  for (int j : part.J) ++seen.at(j);
  if (std::any_of(seen.begin(), seen.end(), [](int v) { return v != 1; })) return false;
  const double q = tp.q(), c = partition_slack(n);
  int imax = part.I.front();
  for (int i : part.I)
    if (tp.t[i] > tp.t[imax]) imax = i;
  if (part.imax < 0 || part.imax >= n || tp.t[imax] != tp.t[part.imax]) return false;
  if (std::isinf(q)) return part.J.empty();
  for (int a : part.I)
    for (int b : part.I)
      if (!((tp.t[a] + c) / q < tp.t[b] && tp.t[b] < q * tp.t[a] - c)) return false;
  for (int j : part.J)
    if (!(q * tp.t[j] - c <= tp.t[imax])) return false;
  return true;
}

/// Lexicographic enumeration of t in [1, T_max]^n satisfying (H).
inline std::vector<DyadicTuple> enumerate_tuples(int n, int t_max, double rho) {
  if (n < 1 || t_max < 1) throw SizingError("enumeration needs n >= 1 and T_max >= 1");
  std::vector<DyadicTuple> out;
  std::vector<int> t(n, 1);
  while (true) {
    DyadicTuple tp = DyadicTuple::make(t, rho);
    if (check_hypothesis_H(tp)) out.push_back(tp);
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++t[i] <= t_max) break;
      t[i] = 1;
    }
    if (i < 0) break;
  }
  return out;
}

/// Largest T with 2^{T+1} at most the smallest Nyquist frequency of the grid.
inline int tmax_for_grid(const GridSpec& g) {
  return static_cast<int>(std::floor(std::log2(g.min_nyquist()))) - 1;
}

namespace detail {

// log-uniform radius and uniform direction per block, radii up to the
// delta_t bounding box; callers reject on delta_t == 0
inline Vec propose_support_point(const DyadicTuple& tp, const ProductSpaceShape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec xi(shape.total_dim());
  const double q = tp.q();
  for (int i = 0; i < shape.blocks(); ++i) {
    double hi = tp.t[i] + 1.0;
    if (tp.rho != 0.0)
      for (int k = 0; k < shape.blocks(); ++k)
        if (k != i) hi = std::min(hi, q * tp.t[k] + 1.0);
    std::uniform_real_distribution<double> u(-2.0, hi);
    double r = std::exp2(u(rng));
    Vec d(shape.dim(i));
    do {
      for (int k = 0; k < shape.dim(i); ++k) d[k] = nd(rng);
    } while (d.norm() < 1e-6);
    shape.block(xi, i) = d * (r / d.norm());
  }
  return xi;
}

inline std::vector<Vec> sample_support(const DyadicTuple& tp, const ProductSpaceShape& shape, int wanted,
                                       std::uint64_t seed, std::size_t* attempts_out = nullptr) {
  std::mt19937_64 rng(seed);
  std::vector<Vec> pts;
  const std::size_t max_attempts = static_cast<std::size_t>(wanted) * 200;
  std::size_t attempts = 0;
  while (static_cast<int>(pts.size()) < wanted && attempts < max_attempts) {
    ++attempts;
    Vec xi = propose_support_point(tp, shape, rng);
    if (delta_t(tp, shape, xi) > 0.0) pts.push_back(xi);
  }
  if (attempts_out) *attempts_out = attempts;
  return pts;
}

}  // namespace detail

struct SupportReport {
  std::size_t support_samples = 0;
  std::size_t attempts = 0;
  std::size_t violations = 0;
  bool empty = false;
};

/// Samples the support of delta_t and checks the block magnitudes predicted for (I, J).
inline SupportReport verify_support_lemma(const DyadicTuple& tp, const ProductSpaceShape& shape,
                                          const IndexPartition& part, int probe_count, std::uint64_t seed = 3) {
  require_tuple_shape(tp, shape);
  if (!check_hypothesis_H(tp)) throw PreconditionError("hypothesis (H) fails for this tuple");
  const double c = partition_slack(tp.size());
  const double q = tp.q();
  SupportReport rep;
  auto pts = detail::sample_support(tp, shape, probe_count, seed, &rep.attempts);
  rep.support_samples = pts.size();
  rep.empty = pts.empty();
  auto lg = [&](const Vec& xi, int i) { return std::log2(shape.block(xi, i).norm()); };
  for (const auto& xi : pts) {
    bool bad = false;
    for (int i : part.I) {
      double l = lg(xi, i);
      if (l < tp.t[i] - c || l > tp.t[i] + c) bad = true;
    }
    for (int j : part.J) {
      if (lg(xi, j) > tp.t[j] + c) bad = true;
      double l = lg(xi, part.imax);
      if (l < q * tp.t[j] - c || l > q * tp.t[j] + c) bad = true;
    }
    if (bad) ++rep.violations;
  }
  return rep;
}

struct CompositeEntry {
  std::vector<int> alpha;
  double fitted_constant = 0.0;  // sup |d^alpha (delta_t sigma)| prod_i 2^{t_i |alpha^i|}
};

struct CompositeReport {
  std::vector<CompositeEntry> entries;
  std::size_t support_samples = 0;
};

inline CompositeReport verify_composite_symbol_bound(const DyadicTuple& tp, const ProductSpaceShape& shape,
                                                     const SymbolSpec& sym, int max_order, int probe_count,
                                                     std::uint64_t seed = 5, const Vec* x_probe = nullptr) {
  require_tuple_shape(tp, shape);
  if (!check_hypothesis_H(tp)) throw PreconditionError("hypothesis (H) fails for this tuple");
  if (max_order < 0 || max_order > 2) throw DomainError("composite bound checked up to order 2");
  const int N = shape.total_dim();
  Vec x = x_probe ? *x_probe : Vec(Vec::Zero(N));
  auto pts = detail::sample_support(tp, shape, probe_count, seed);
  auto idx = detail::multi_indices(N, max_order);
  std::vector<double> steps(N);
  for (int i = 0; i < shape.blocks(); ++i)
    for (int k = 0; k < shape.dim(i); ++k) steps[shape.offset(i) + k] = 0.01 * std::exp2(tp.t[i]);
  CompositeReport rep;
  rep.support_samples = pts.size();
  auto f = [&](const Vec& xi) { return delta_t(tp, shape, xi) * eval_symbol(sym, x, xi); };
  for (const auto& a : idx) {
    double scale = 1.0;
    for (int i = 0; i < shape.blocks(); ++i)
      for (int k = 0; k < shape.dim(i); ++k) scale *= std::pow(2.0, tp.t[i] * a[shape.offset(i) + k]);
    double sup = 0.0;
    for (const auto& xi : pts) sup = std::max(sup, std::abs(detail::tensor_difference(f, xi, a, steps)));
    rep.entries.push_back({a, sup * scale});
  }
  return rep;
}

/// delta_t(xi) prod_i phi(2^{-s_i} |xi^i|)
inline double delta_t_s(const DyadicTuple& tp, const std::vector<int>& s, const ProductSpaceShape& shape,
                        const Vec& xi) {
  if (static_cast<int>(s.size()) != shape.blocks()) throw SizingError("second tuple length mismatch");
  for (int v : s)
    if (v < 1) throw DomainError("second tuple entries must be >= 1");
  double v = delta_t(tp, shape, xi);
  for (int i = 0; i < shape.blocks() && v != 0.0; ++i) v *= bump_phi(std::exp2(-s[i]) * shape.block(xi, i).norm());
  return v;
}

/// Delta_t f = inverse_transform(delta_t * forward_transform(f))
inline SampledField partial_sum_apply(const DyadicTuple& tp, const SampledField& f) {
  if (f.domain != Domain::physical) throw DomainError("partial sums act on physical-domain fields");
  require_tuple_shape(tp, f.grid.shape);
  SampledField g = forward_transform(f);
  for_each_point(g.grid, Domain::frequency,
                 [&](std::size_t k, const Vec& xi) { g.values[k] *= delta_t(tp, g.grid.shape, xi); });
  return inverse_transform(std::move(g));
}

/// 1 - sum over (H)-tuples with entries <= T_max of delta_t(xi).
inline double low_frequency_remainder(int t_max, double rho, const ProductSpaceShape& shape, const Vec& xi) {
  double s = 0.0;
  for (const auto& tp : enumerate_tuples(shape.blocks(), t_max, rho)) s += delta_t(tp, shape, xi);
  return 1.0 - s;
}

/// Same as above with a pre-enumerated tuple list.
inline double low_frequency_remainder(const std::vector<DyadicTuple>& tuples, const ProductSpaceShape& shape,
                                      const Vec& xi) {
  double s = 0.0;
  for (const auto& tp : tuples) s += delta_t(tp, shape, xi);
  return 1.0 - s;
}

}  // namespace pfio
