#include "currentlab/report.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "currentlab/lattice.hpp"

namespace currentlab::report {

using nlohmann::ordered_json;

namespace {

ordered_json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

bool Report::passed() const {
  for (const auto& g : gates) {
    if (!g.pass) return false;
  }
  for (const auto& r : residuals) {
    if (!r.pass()) return false;
  }
  return true;
}

const Gate* Report::gate(const std::string& name) const {
  for (const auto& g : gates) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

stats::Interval Report::interval(const Estimate& e) const { return stats::wilson_ci(e.hits, e.trials, confidence); }

void Report::add_gate(std::string name, bool pass, std::string detail) {
  gates.push_back({std::move(name), pass, std::move(detail)});
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string estimates_csv(const Report& r) {
  std::ostringstream out;
  out << "experiment,r,R,k,hits,trials,p_hat,ci_lo,ci_hi,seed\n";
  for (const auto& e : r.estimates) {
    const auto ci = r.interval(e);
    out << e.experiment << ',' << e.r << ',' << e.R << ',' << e.k << ',' << e.hits << ',' << e.trials << ','
        << format_number(e.p_hat()) << ',' << format_number(ci.lo) << ',' << format_number(ci.hi) << ',' << e.seed
        << '\n';
  }
  return out.str();
}

std::string fits_json(const Report& r) {
  ordered_json fits = ordered_json::array();
  for (const auto& f : r.fits) {
    ordered_json pts = ordered_json::array();
    for (const auto& [x, y] : f.fit.points) pts.push_back({number(x), number(y)});
    ordered_json extra = ordered_json::object();
    for (const auto& [k, v] : f.extra) extra[k] = number(v);
    fits.push_back({{"name", f.name},
                    {"points", pts},
                    {"slope", number(f.fit.slope)},
                    {"intercept", number(f.fit.intercept)},
                    {"residual", number(f.fit.residual)},
                    {"extra", extra}});
  }
  ordered_json doc = {{"experiment", r.experiment}, {"seed", r.seed}, {"fits", fits}};
  return doc.dump(2) + "\n";
}

std::string residuals_json(const Report& r) {
  ordered_json res = ordered_json::array();
  for (const auto& x : r.residuals) {
    res.push_back({{"suite", x.suite},
                   {"case", x.case_id},
                   {"residual", number(x.value)},
                   {"tolerance", number(x.tolerance)},
                   {"pass", x.pass()}});
  }
  ordered_json gates = ordered_json::array();
  for (const auto& g : r.gates) gates.push_back({{"name", g.name}, {"pass", g.pass}, {"detail", g.detail}});
  ordered_json doc = {{"experiment", r.experiment}, {"seed", r.seed}, {"passed", r.passed()},
                      {"residuals", res},           {"gates", gates}};
  return doc.dump(2) + "\n";
}

void write_report(const std::string& dir, const Report& r) {
  const std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  write_file(p / "estimates.csv", estimates_csv(r));
  write_file(p / "fits.json", fits_json(r));
  write_file(p / "residuals.json", residuals_json(r));
}

}  // namespace currentlab::report
