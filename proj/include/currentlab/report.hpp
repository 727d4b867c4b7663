#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "currentlab/stats.hpp"

namespace currentlab::report {

/// One Monte Carlo proportion. Intervals are derived at write time from
/// (hits, trials) and the report's confidence.
struct Estimate {
  std::string experiment;
  int r = 0;
  int R = 0;
  int k = 0;
  std::int64_t hits = 0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;

  double p_hat() const { return trials > 0 ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0; }
};

struct Fit {
  std::string name;
  stats::SeriesFit fit;
  std::map<std::string, double> extra;
};

struct Residual {
  std::string suite;
  std::string case_id;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass() const { return value <= tolerance; }
};

struct Gate {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::string experiment;
  std::uint64_t seed = 0;
  double confidence = 0.95;
  std::vector<Estimate> estimates;
  std::vector<Fit> fits;
  std::vector<Residual> residuals;
  std::vector<Gate> gates;

  bool passed() const;
  const Gate* gate(const std::string& name) const;
  stats::Interval interval(const Estimate& e) const;
  void add_gate(std::string name, bool pass, std::string detail);
};

std::string estimates_csv(const Report& r);
std::string fits_json(const Report& r);
std::string residuals_json(const Report& r);
/// Writes estimates.csv, fits.json and residuals.json into dir (created if needed).
void write_report(const std::string& dir, const Report& r);
/// Number formatting shared by every output: shortest round-trip form.
std::string format_number(double x);

}  // namespace currentlab::report
