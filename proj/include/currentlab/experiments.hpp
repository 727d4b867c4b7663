#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "currentlab/config.hpp"
#include "currentlab/lattice.hpp"
#include "currentlab/parallel.hpp"
#include "currentlab/report.hpp"
#include "currentlab/sampler.hpp"

// Experiment drivers. Each one reads its parameters from a Config, runs
// independent chains seeded from the master seed, and returns a Report whose
// gates decide the exit code of the CLI.
namespace currentlab::experiments {

/// Sampling schedule shared by the Monte Carlo experiments.
/// Keys: chains, samples_per_chain, burn_in, sweeps, seed, parallel.
struct ChainPlan {
  int chains = 4;
  int samples = 1000;
  int burn_in = 64;
  int sweeps = 2;
  std::uint64_t seed = 1;
  Exec exec = Exec::Parallel;

  static ChainPlan from(const Config& cfg, int chains, int samples, int burn_in, int sweeps);
  std::int64_t trials() const { return static_cast<std::int64_t>(chains) * samples; }
  std::uint64_t chain_seed(int chain) const;
};

/// Counts one sample of a double current into `hits`.
using Evaluator = std::function<void(const sampler::DoubleTrace&, std::vector<std::int64_t>& hits)>;

/// Runs plan.chains pairs of independent sourceless current chains on g and
/// sums the evaluator counts in chain order. Only `edges` are sampled (all
/// edges when empty). make_eval builds a fresh evaluator per chain.
std::vector<std::int64_t> sample_double(const lattice::DomainGraph& g, std::span<const int> edges,
                                        const ChainPlan& plan, std::size_t counters,
                                        const std::function<Evaluator()>& make_eval);

/// Edges with both endpoints in Lambda_R(x).
std::vector<int> box_edges(const lattice::DomainGraph& g, Coord x, int R);

/// Connected edge subsets of g, each as a DomainGraph on its endpoints.
std::vector<lattice::DomainGraph> connected_subgraphs(const lattice::DomainGraph& g);

report::Report run_identity_suite(const Config& cfg);
report::Report run_sampler_oracle(const Config& cfg);
report::Report run_coupling_suite(const Config& cfg);
report::Report run_boundary_connection(const Config& cfg);
report::Report run_pivotal(const Config& cfg, bool square, bool hole);
report::Report run_pivotal_square(const Config& cfg);
report::Report run_pivotal_hole(const Config& cfg);
report::Report run_ab_criterion(const Config& cfg);
report::Report run_harmonic_sandwich(const Config& cfg);
report::Report run_crossing_bound(const Config& cfg);

/// Names accepted by run_experiment.
std::vector<std::string> experiment_names();
/// Dispatches on the "experiment" key.
report::Report run_experiment(const Config& cfg);

}  // namespace currentlab::experiments
