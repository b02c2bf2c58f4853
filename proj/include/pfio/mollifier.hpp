#pragma once

#include <cmath>

namespace pfio {

namespace detail {
inline double smooth_step_seed(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
}  // namespace detail

/// Radial cutoff: 1 on [0,1], 0 on [2,inf), smooth and monotone in between.
inline double psi0(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  double a = detail::smooth_step_seed(2.0 - r);
  double b = detail::smooth_step_seed(r - 1.0);
  return a / (a + b);
}

/// Littlewood-Paley shell function phi(r) = psi0(r) - psi0(2r), supported in [1/2, 2].
inline double bump_phi(double r) { return psi0(r) - psi0(2.0 * r); }

/// Compact bump exp(1 - 1/(1 - r^2)) on r < 1, with b(0) = 1.
inline double bump(double r) {
  double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r2));
}

// d/dr of bump
inline double bump_derivative(double r) {
  double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  double d = 1.0 - r2;
  return bump(r) * (-2.0 * r / (d * d));
}

/// Taper used to suppress aliasing: 1 below plateau * nyq, 0 above nyq.
inline double nyquist_taper(double r, double nyq, double plateau) {
  double u = r / nyq;
  if (u <= plateau) return 1.0;
  if (u >= 1.0) return 0.0;
  return psi0(1.0 + (u - plateau) / (1.0 - plateau));
}

}  // namespace pfio
