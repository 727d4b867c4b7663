#include "currentlab/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "currentlab/lattice.hpp"

namespace currentlab::stats {

double z_for_confidence(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error("confidence must lie in (0, 1)");
  const boost::math::normal_distribution<double> normal;
  return boost::math::quantile(normal, 0.5 + confidence / 2.0);
}

Interval wilson_z(std::int64_t hits, std::int64_t trials, double z) {
  if (trials <= 0) throw Error("Wilson interval needs at least one trial");
  if (hits < 0 || hits > trials) throw Error("hits must lie in [0, trials]");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Interval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  if (hits == 0) ci.lo = 0.0;
  if (hits == trials) ci.hi = 1.0;
  return ci;
}

Interval wilson_ci(std::int64_t hits, std::int64_t trials, double confidence) {
  return wilson_z(hits, trials, z_for_confidence(confidence));
}

double wilson_distance(std::int64_t hits, std::int64_t trials, double p) {
  if (wilson_z(hits, trials, 0.0).contains(p)) return 0.0;
  double lo = 0.0, hi = 100.0;
  if (!wilson_z(hits, trials, hi).contains(p)) return hi;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (wilson_z(hits, trials, mid).contains(p) ? hi : lo) = mid;
  }
  return hi;
}

SeriesFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("fit needs matching x and y");
  SeriesFit fit;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) fit.points.emplace_back(std::log(x[i]), std::log(y[i]));
  }
  const auto n = static_cast<double>(fit.points.size());
  if (fit.points.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [a, b] : fit.points) {
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (auto [a, b] : fit.points) {
    const double r = b - (fit.intercept + fit.slope * a);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace currentlab::stats
