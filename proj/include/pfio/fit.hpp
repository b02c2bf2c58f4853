#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pfio/error.hpp"

namespace pfio {

/// Least-squares line through (abscissae, ordinates), both on log2 scale.
struct DecayFitReport {
  std::string label;
  std::vector<double> abscissae;
  std::vector<double> ordinates;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();  // RMS, log2 units
  bool pass = false;
  std::string note;
};

inline DecayFitReport fit_line(std::vector<double> xs, std::vector<double> ys, std::string label = {}) {
  if (xs.size() != ys.size()) throw SizingError("fit needs equally many abscissae and ordinates");
  DecayFitReport r;
  r.label = std::move(label);
  r.abscissae = std::move(xs);
  r.ordinates = std::move(ys);
  const std::size_t n = r.abscissae.size();
  if (n < 2) return r;
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += r.abscissae[k];
    my += r.ordinates[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (r.abscissae[k] - mx) * (r.abscissae[k] - mx);
    sxy += (r.abscissae[k] - mx) * (r.ordinates[k] - my);
  }
  if (sxx == 0.0) return r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double e = r.ordinates[k] - (r.intercept + r.slope * r.abscissae[k]);
    ss += e * e;
  }
  r.residual = std::sqrt(ss / n);
  return r;
}

/// Fit of log2(values) against log2(scales); nonpositive values give -inf ordinates and a NaN slope.
inline DecayFitReport fit_loglog(const std::vector<double>& scales, const std::vector<double>& values,
                                 std::string label = {}) {
  std::vector<double> xs, ys;
  for (double s : scales) xs.push_back(std::log2(s));
  for (double v : values) ys.push_back(v > 0.0 ? std::log2(v) : -std::numeric_limits<double>::infinity());
  bool finite = std::all_of(ys.begin(), ys.end(), [](double y) { return std::isfinite(y); });
  if (!finite) {
    DecayFitReport r;
    r.label = std::move(label);
    r.abscissae = xs;
    r.ordinates = ys;
    r.note = "nonpositive measurement";
    return r;
  }
  return fit_line(std::move(xs), std::move(ys), std::move(label));
}

inline double max_over_min(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo <= 0.0) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

}  // namespace pfio
