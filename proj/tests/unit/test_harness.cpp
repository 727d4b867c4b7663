#include <doctest.h>

#include <random>
#include <stdexcept>

#include "currentlab/config.hpp"
#include "currentlab/experiments.hpp"
#include "currentlab/parallel.hpp"
#include "currentlab/report.hpp"
#include "currentlab/stats.hpp"

using namespace currentlab;

TEST_CASE("config parsing") {
  const auto cfg = Config::parse("# comment\nexperiment = identity\nR = 8, 16 ,32\nbeta = 0.5\nflag = true\n");
  CHECK(cfg.str("experiment") == "identity");
  CHECK(cfg.ints("R") == std::vector<int>{8, 16, 32});
  CHECK(cfg.real("beta", 0.0) == 0.5);
  CHECK(cfg.flag("flag", false));
  CHECK(cfg.integer("missing", 7) == 7);
  CHECK(cfg.unused().empty());
  CHECK_THROWS_WITH(cfg.str("nope"), doctest::Contains("missing config key 'nope'"));
  CHECK_THROWS_WITH(cfg.integer("beta"), doctest::Contains("bad number"));

  const auto partial = Config::parse("a = 1\nb = 2\n");
  (void)partial.integer("a", 0);
  CHECK(partial.unused() == std::vector<std::string>{"b"});

  CHECK_THROWS_WITH(Config::parse("a = 1\n\na = 2\n", "x.cfg"), doctest::Contains("x.cfg:3: duplicate key 'a'"));
  CHECK_THROWS_WITH(Config::parse("a = 1\nb\n", "y.cfg"), doctest::Contains("y.cfg:2: expected key = value"));
}

TEST_CASE("Wilson interval") {
  const auto ci = stats::wilson_ci(50, 100, 0.95);
  CHECK(ci.lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(ci.hi == doctest::Approx(0.5962).epsilon(1e-3));
  CHECK(stats::z_for_confidence(0.95) == doctest::Approx(1.959964).epsilon(1e-6));
  const auto zero = stats::wilson_ci(0, 20, 0.95);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
  CHECK(stats::wilson_distance(50, 100, 0.5) == doctest::Approx(0.0));
  // The distance is the z at which the interval edge reaches p.
  const double d = stats::wilson_distance(50, 100, 0.3);
  CHECK(stats::wilson_z(50, 100, d).lo == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("Wilson interval covers at close to the nominal rate") {
  std::mt19937_64 eng(9);
  std::binomial_distribution<std::int64_t> bin(200, 0.3);
  int covered = 0;
  const int reps = 1000;
  for (int i = 0; i < reps; ++i) covered += stats::wilson_ci(bin(eng), 200, 0.95).contains(0.3);
  CHECK(covered >= 900);
}

TEST_CASE("log-log fit recovers a power law") {
  const auto fit = stats::loglog_fit({2, 4, 8, 16}, {3.0 / 4, 3.0 / 16, 3.0 / 64, 0.0});
  CHECK(fit.points.size() == 3);
  CHECK(fit.slope == doctest::Approx(-2.0));
  CHECK(fit.residual == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("report output") {
  report::Report rep;
  rep.experiment = "demo";
  rep.seed = 3;
  rep.estimates.push_back({"demo", 1, 8, 0, 5, 10, 3});
  rep.residuals.push_back({"suite", "case 1", 1e-12, 1e-10});
  rep.add_gate("g", true, "fine");
  const auto csv = report::estimates_csv(rep);
  CHECK(csv.rfind("experiment,r,R,k,hits,trials,p_hat,ci_lo,ci_hi,seed\n", 0) == 0);
  CHECK(csv.find("demo,1,8,0,5,10,0.5,") != std::string::npos);
  CHECK(report::estimates_csv(rep) == csv);
  CHECK(report::residuals_json(rep).find("\"case 1\"") != std::string::npos);
  CHECK(report::residuals_json(rep).find("\"broken\"") == std::string::npos);
  CHECK(rep.passed());
  CHECK(report::residuals_json(rep).find("\"fine\"") != std::string::npos);
  rep.add_gate("h", false, "broken");
  CHECK_FALSE(rep.passed());
  CHECK(report::format_number(0.1) == "0.1");
  CHECK(report::format_number(2.0) == "2");
}

TEST_CASE("map_tasks gives the same vector serially and in parallel") {
  auto f = [](int i) { return static_cast<long>(i) * i + 1; };
  CHECK(map_tasks(50, f, Exec::Serial) == map_tasks(50, f, Exec::Parallel));
  auto boom = [](int i) -> int {
    if (i == 7 || i == 30) throw std::runtime_error("task " + std::to_string(i));
    return i;
  };
  CHECK_THROWS_WITH(map_tasks(40, boom, Exec::Parallel), "task 7");
  CHECK_THROWS_WITH(map_tasks(40, boom, Exec::Serial), "task 7");
}

TEST_CASE("a corrupted identity case fails with its location") {
  auto cfg = Config::parse("experiment = identity\nlemma_graphs = 3\nmax_sources = 2\ncorrupt_case = 1\n");
  const auto rep = experiments::run_experiment(cfg);
  CHECK_FALSE(rep.passed());
  const auto* gate = rep.gate("switching_lemma");
  REQUIRE(gate != nullptr);
  CHECK(gate->detail.find(" at graph 1 ") != std::string::npos);

  cfg = Config::parse("experiment = identity\nlemma_graphs = 3\nmax_sources = 2\n");
  CHECK(experiments::run_experiment(cfg).passed());
}

TEST_CASE("an identity run with nothing selected is an error") {
  const auto cfg = Config::parse("experiment = identity\nlemma = false\nprinciple = false\nflux = false\nparity = false\n");
  CHECK_THROWS_WITH(experiments::run_experiment(cfg), doctest::Contains("no cases"));
  CHECK_THROWS(experiments::run_experiment(Config::parse("experiment = nonsense\n")));
}

TEST_CASE("small experiments are reproducible") {
  auto render = [](const std::string& parallel) {
    auto cfg = Config::parse("experiment = boundary_connection\nseed = 5\nR = 4, 6\nchains = 3\nsamples_per_chain = 30\n"
                             "burn_in = 8\n");
    cfg.set("parallel", parallel);
    const auto rep = experiments::run_experiment(cfg);
    return report::estimates_csv(rep) + report::fits_json(rep);
  };
  const auto a = render("true");
  CHECK(a == render("true"));
  CHECK(a == render("false"));
  auto other = Config::parse("experiment = boundary_connection\nseed = 6\nR = 4, 6\nchains = 3\nsamples_per_chain = 30\n"
                             "burn_in = 8\n");
  const auto rep = experiments::run_experiment(other);
  CHECK(report::estimates_csv(rep) != report::estimates_csv(experiments::run_experiment(
                                           Config::parse("experiment = boundary_connection\nseed = 5\nR = 4, 6\n"
                                                         "chains = 3\nsamples_per_chain = 30\nburn_in = 8\n"))));
}
