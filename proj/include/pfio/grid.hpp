#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pfio/error.hpp"
#include "pfio/fft.hpp"
#include "pfio/types.hpp"

namespace pfio {

/// Block structure R^N = R^{N_1} x ... x R^{N_n}.
class ProductSpaceShape {
 public:
  ProductSpaceShape() = default;

  static ProductSpaceShape make(std::vector<int> dims) {
    if (dims.empty()) throw SizingError("product shape needs at least one block");
    int total = 0;
    for (int d : dims) {
      if (d <= 0) throw SizingError("block dimensions must be positive");
      total += d;
    }
    if (total > kMaxDim) throw SizingError("total dimension exceeds " + std::to_string(kMaxDim));
    ProductSpaceShape s;
    s.dims_ = std::move(dims);
    s.offsets_.resize(s.dims_.size());
    int off = 0;
    for (std::size_t i = 0; i < s.dims_.size(); ++i) {
      s.offsets_[i] = off;
      off += s.dims_[i];
    }
    s.total_ = total;
    return s;
  }

  int blocks() const { return static_cast<int>(dims_.size()); }
  int total_dim() const { return total_; }
  int dim(int i) const { return dims_[i]; }
  int offset(int i) const { return offsets_[i]; }
  const std::vector<int>& dims() const { return dims_; }

  auto block(const Vec& v, int i) const { return v.segment(offsets_[i], dims_[i]); }
  auto block(Vec& v, int i) const { return v.segment(offsets_[i], dims_[i]); }

  double block_norm(const Vec& v, int i) const { return block(v, i).norm(); }

  bool operator==(const ProductSpaceShape& o) const { return dims_ == o.dims_; }

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int total_ = 0;
};

enum class Domain { physical, frequency };

/// Centered lattice on [-L, L)^N and its dual lattice.
/// x_k = (k - M/2) h with h = 2L/M, xi_l = (l - M/2) / (2L).
struct GridSpec {
  ProductSpaceShape shape;
  std::vector<int> samples;
  std::vector<double> half_width;

  int dim() const { return static_cast<int>(samples.size()); }
  std::size_t size() const {
    std::size_t s = 1;
    for (int m : samples) s *= static_cast<std::size_t>(m);
    return s;
  }
  double spacing(int a) const { return 2.0 * half_width[a] / samples[a]; }
  double dual_spacing(int a) const { return 1.0 / (2.0 * half_width[a]); }
  double nyquist(int a) const { return samples[a] / (4.0 * half_width[a]); }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= spacing(a);
    return v;
  }
  double dual_cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= dual_spacing(a);
    return v;
  }
  double weight(Domain d) const { return d == Domain::physical ? cell_volume() : dual_cell_volume(); }
  double coord(int a, int k) const { return (k - samples[a] / 2) * spacing(a); }
  double freq(int a, int l) const { return (l - samples[a] / 2) * dual_spacing(a); }
  double value(Domain d, int a, int k) const { return d == Domain::physical ? coord(a, k) : freq(a, k); }

  // smallest Nyquist frequency over the axes of block i (or all axes if i < 0)
  double min_nyquist(int block = -1) const {
    double r = std::numeric_limits<double>::infinity();
    int lo = block < 0 ? 0 : shape.offset(block);
    int hi = block < 0 ? dim() : lo + shape.dim(block);
    for (int a = lo; a < hi; ++a) r = std::min(r, nyquist(a));
    return r;
  }

  Vec point(Domain d, std::size_t flat) const {
    Vec v(dim());
    for (int a = dim() - 1; a >= 0; --a) {
      int k = static_cast<int>(flat % samples[a]);
      flat /= samples[a];
      v[a] = value(d, a, k);
    }
    return v;
  }

  // flat index of the lattice point nearest to v (clamped)
  std::size_t nearest_index(Domain d, const Vec& v) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim(); ++a) {
      double step = d == Domain::physical ? spacing(a) : dual_spacing(a);
      long k = std::lround(v[a] / step) + samples[a] / 2;
      k = std::clamp<long>(k, 0, samples[a] - 1);
      flat = flat * samples[a] + static_cast<std::size_t>(k);
    }
    return flat;
  }
};

/// Visit every lattice point in row-major order (last axis fastest).
template <class F>
void for_each_point(const GridSpec& g, Domain d, F&& f) {
  const int n = g.dim();
  std::vector<int> idx(n, 0);
  Vec v(n);
  for (int a = 0; a < n; ++a) v[a] = g.value(d, a, 0);
  const std::size_t total = g.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    f(flat, static_cast<const Vec&>(v));
    for (int a = n - 1; a >= 0; --a) {
      if (++idx[a] < g.samples[a]) {
        v[a] = g.value(d, a, idx[a]);
        break;
      }
      idx[a] = 0;
      v[a] = g.value(d, a, 0);
    }
  }
}

inline GridSpec make_grid(const ProductSpaceShape& shape, std::vector<int> samples,
                          std::vector<double> half_width) {
  const int n = shape.total_dim();
  if (n == 0) throw SizingError("empty product shape");
  if (samples.size() == 1) samples.assign(n, samples[0]);
  if (half_width.size() == 1) half_width.assign(n, half_width[0]);
  if (static_cast<int>(samples.size()) != n || static_cast<int>(half_width.size()) != n)
    throw SizingError("grid needs one sample count and one half width per axis");
  double total = 1.0;
  for (int a = 0; a < n; ++a) {
    if (samples[a] < 8 || samples[a] % 2 != 0)
      throw SizingError("sample counts must be even and at least 8");
    if (!(half_width[a] > 0.0) || !std::isfinite(half_width[a]))
      throw SizingError("half widths must be positive and finite");
    total *= samples[a];
  }
  if (total > 1e9) throw SizingError("grid too large");
  return GridSpec{shape, std::move(samples), std::move(half_width)};
}

inline GridSpec make_grid(const ProductSpaceShape& shape, int samples, double half_width) {
  return make_grid(shape, std::vector<int>{samples}, std::vector<double>{half_width});
}

struct SampledField {
  GridSpec grid;
  Domain domain = Domain::physical;
  std::vector<Complex> values;

  SampledField() = default;
  SampledField(GridSpec g, Domain d) : grid(std::move(g)), domain(d), values(grid.size()) {}
  SampledField(GridSpec g, Domain d, std::vector<Complex> v)
      : grid(std::move(g)), domain(d), values(std::move(v)) {
    if (values.size() != grid.size()) throw SizingError("field size does not match grid");
  }

  template <class F>
  static SampledField from_function(const GridSpec& g, Domain d, F&& f) {
    SampledField out(g, d);
    for_each_point(g, d, [&](std::size_t k, const Vec& v) { out.values[k] = f(v); });
    return out;
  }

  std::size_t size() const { return values.size(); }
  Complex& operator[](std::size_t k) { return values[k]; }
  const Complex& operator[](std::size_t k) const { return values[k]; }
};

namespace detail {

// multiply by (-1)^{sum of lattice indices}
inline void checkerboard(const GridSpec& g, std::vector<Complex>& v) {
  const int n = g.dim();
  std::vector<int> idx(n, 0);
  int parity = 0;
  for (std::size_t flat = 0; flat < v.size(); ++flat) {
    if (parity) v[flat] = -v[flat];
    for (int a = n - 1; a >= 0; --a) {
      parity ^= 1;
      if (++idx[a] < g.samples[a]) break;
      // a wrap moves the index by M-1, which is odd for even M
      idx[a] = 0;
    }
  }
}

}  // namespace detail

/// out_l = scale * sum_k v_k exp(sign 2 pi i x_k . xi_l) on the centered lattices.
/// With sign -1 and scale h^N this is the forward transform.
inline void centered_dft(const GridSpec& g, std::vector<Complex>& v, int sign, double scale) {
  if (v.size() != g.size()) throw SizingError("data size does not match grid");
  detail::checkerboard(g, v);
  detail::raw_dft(g.samples, v, sign);
  detail::checkerboard(g, v);
  int half_sum = 0;
  for (int m : g.samples) half_sum += m / 2;
  double s = (half_sum % 2 == 0) ? scale : -scale;
  for (auto& z : v) z *= s;
}

inline SampledField forward_transform(SampledField f) {
  if (f.domain != Domain::physical) throw DomainError("forward transform expects a physical-domain field");
  centered_dft(f.grid, f.values, -1, f.grid.cell_volume());
  f.domain = Domain::frequency;
  return f;
}

inline SampledField inverse_transform(SampledField f) {
  if (f.domain != Domain::frequency) throw DomainError("inverse transform expects a frequency-domain field");
  centered_dft(f.grid, f.values, +1, f.grid.dual_cell_volume());
  f.domain = Domain::physical;
  return f;
}

/// Discrete L^p norm with the lattice weight of the field's domain. p = inf gives the sup.
inline double lp_norm(const SampledField& f, double p) {
  if (std::isnan(p) || p < 1.0) throw DomainError("lp_norm needs p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& z : f.values) m = std::max(m, std::abs(z));
    return m;
  }
  const double w = f.grid.weight(f.domain);
  // scale by the max first so large p does not overflow
  double m = 0.0;
  for (const auto& z : f.values) m = std::max(m, std::abs(z));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& z : f.values) s += std::pow(std::abs(z) / m, p);
  return m * std::pow(s * w, 1.0 / p);
}

inline Complex inner_product(const SampledField& f, const SampledField& g) {
  if (f.size() != g.size() || f.domain != g.domain) throw SizingError("inner product of mismatched fields");
  Complex s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += f.values[k] * std::conj(g.values[k]);
  return s * f.grid.weight(f.domain);
}

}  // namespace pfio
