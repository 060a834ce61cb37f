#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "accmd/common.hpp"

namespace accmd {

// Least-squares decay-rate fit of a positive gap sequence. Two models are
// fitted over the same window:
//   geometric:  log(gap_k) ~ a + slope * k        (contraction = e^slope)
//   power law:  log(gap_k) ~ a + power_slope * log(k)
// Points at or below the reference (and k = 0 for the power model) are
// excluded; fewer than min_points surviving points mark the fit inconclusive.
struct RateFit {
  bool conclusive = false;
  std::size_t points = 0;
  double slope = 0.0;        // d log(gap) / d k
  double contraction = 1.0;  // per-iteration factor exp(slope)
  double power_slope = 0.0;  // d log(gap) / d log k
};

constexpr std::size_t rate_fit_min_points = 10;

namespace detail {

// Slope of the LS line y ~ a + s x.
inline bool ls_slope(const std::vector<double>& xs,
                     const std::vector<double>& ys, double& slope) {
  const std::size_t n = xs.size();
  if (n < 2) return false;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) return false;
  slope = sxy / sxx;
  return true;
}

}  // namespace detail

// ks[i] is the iteration index of values[i]; the fit uses the trailing
// `window` entries (0 = all).
inline RateFit fit_rate(const std::vector<double>& ks,
                        const std::vector<double>& values, double reference,
                        std::size_t window = 0) {
  if (ks.size() != values.size())
    throw usage_error("fit_rate: index/value length mismatch");
  const std::size_t n = values.size();
  const std::size_t start = (window == 0 || window >= n) ? 0 : n - window;

  std::vector<double> xs, ys, lxs;
  std::vector<double> lys;  // power-model subset (k > 0)
  for (std::size_t i = start; i < n; ++i) {
    const double gap = values[i] - reference;
    if (!(gap > 0.0) || !std::isfinite(gap)) continue;
    xs.push_back(ks[i]);
    ys.push_back(std::log(gap));
    if (ks[i] > 0.0) {
      lxs.push_back(std::log(ks[i]));
      lys.push_back(std::log(gap));
    }
  }

  RateFit fit;
  fit.points = xs.size();
  if (xs.size() < rate_fit_min_points) return fit;  // inconclusive

  double s = 0.0;
  if (!detail::ls_slope(xs, ys, s)) return fit;
  fit.slope = s;
  fit.contraction = std::exp(s);
  double ps = 0.0;
  if (lxs.size() >= rate_fit_min_points && detail::ls_slope(lxs, lys, ps))
    fit.power_slope = ps;
  fit.conclusive = true;
  return fit;
}

inline RateFit fit_rate(const std::vector<double>& values, double reference,
                        std::size_t window = 0) {
  std::vector<double> ks(values.size());
  for (std::size_t i = 0; i < ks.size(); ++i)
    ks[i] = static_cast<double>(i);
  return fit_rate(ks, values, reference, window);
}

}  // namespace accmd
