// Serial reference vs OpenMP map over independent chains. Both paths must
// give identical counts; the timing shows the parallel speed-up.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <omp.h>

#include "currentlab/clusters.hpp"
#include "currentlab/experiments.hpp"

using namespace currentlab;

int main(int argc, char** argv) {
  const int R = argc > 1 ? std::atoi(argv[1]) : 32;
  const int samples = argc > 2 ? std::atoi(argv[2]) : 200;
  const int chains = argc > 3 ? std::atoi(argv[3]) : 8;
  const auto g = lattice::build_box(2 * R);

  experiments::ChainPlan plan;
  plan.chains = chains;
  plan.samples = samples;
  plan.burn_in = 16;
  plan.sweeps = 1;
  plan.seed = 7;

  auto make_eval = [&] {
    auto probe = std::make_shared<clusters::BoundaryProbe>(g, R, 1);
    return experiments::Evaluator([probe](const sampler::DoubleTrace& dc, std::vector<std::int64_t>& hits) {
      hits[0] += probe->connected(dc.positive);
    });
  };
  auto time = [&](Exec exec, std::vector<std::int64_t>& out) {
    plan.exec = exec;
    const auto t0 = std::chrono::steady_clock::now();
    out = experiments::sample_double(g, {}, plan, 1, make_eval);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  std::vector<std::int64_t> serial, parallel;
  const double ts = time(Exec::Serial, serial);
  const double tp = time(Exec::Parallel, parallel);
  std::printf("box %d, %d chains x %d samples, %d threads\n", 2 * R, chains, samples, omp_get_max_threads());
  std::printf("serial   %8.3f s  hits %lld\n", ts, static_cast<long long>(serial[0]));
  std::printf("parallel %8.3f s  hits %lld  speed-up %.2f\n", tp, static_cast<long long>(parallel[0]), ts / tp);
  if (serial != parallel) {
    std::printf("MISMATCH between serial and parallel counts\n");
    return 1;
  }
  return 0;
}
