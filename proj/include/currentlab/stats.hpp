#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace currentlab::stats {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

/// Two-sided normal quantile for the given confidence (0.95 -> 1.959964).
double z_for_confidence(double confidence);

/// Wilson score interval for a binomial proportion at confidence level.
Interval wilson_ci(std::int64_t hits, std::int64_t trials, double confidence);
/// Wilson interval with an explicit z (z = 4 for "within 4 sigma" gates).
Interval wilson_z(std::int64_t hits, std::int64_t trials, double z);

/// Smallest z whose Wilson interval contains p (0 when p equals the
/// estimate); capped at 100.
double wilson_distance(std::int64_t hits, std::int64_t trials, double p);

struct SeriesFit {
  std::vector<std::pair<double, double>> points;  // (log x, log y)
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the fit residuals
};

/// Least-squares line through (log x_i, log y_i); points with y <= 0 are dropped.
SeriesFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace currentlab::stats
