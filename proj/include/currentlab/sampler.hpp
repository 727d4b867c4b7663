#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "currentlab/exact.hpp"
#include "currentlab/lattice.hpp"
#include "currentlab/rng.hpp"

// Samplers at beta_c: FK-Ising by Swendsen-Wang, Ising spins by Edwards-Sokal,
// the odd part of a current through Kramers-Wannier dual contours, and full
// current traces by sprinkling positive even edges.
namespace currentlab::sampler {

using lattice::DomainGraph;

/// Per-edge parity and positivity bits.
struct CurrentTrace {
  std::vector<std::uint8_t> odd;
  std::vector<std::uint8_t> positive;
};

struct FkConfig {
  std::vector<std::uint8_t> open;
};

/// Spin per merge class (+1 / -1).
struct SpinConfig {
  std::vector<std::int8_t> spin;
};

/// n1 + n2 on one domain: union of positives, xor of parities, and the
/// parity of n1 alone (needed for n1-flux).
struct DoubleTrace {
  std::vector<std::uint8_t> positive;
  std::vector<std::uint8_t> parity;
  std::vector<std::uint8_t> parity1;
};

/// Swendsen-Wang on the merge-class graph; edges inside a class always join
/// equal spins and open with probability p_c.
class FkChain {
 public:
  FkChain(const DomainGraph& g, std::uint64_t seed);

  void advance(int sweeps);
  /// Bond configuration drawn in the latest sweep (empty before the first).
  const FkConfig& sample() const { return omega_; }
  const SpinConfig& spins() const { return spins_; }
  std::uint64_t seed() const { return seed_; }
  long sweeps_done() const { return sweeps_; }

 private:
  void sweep();

  const DomainGraph* g_;
  std::vector<std::array<int, 2>> ends_;
  std::uint64_t seed_;
  long sweeps_ = 0;
  Engine eng_;
  Bernoulli bond_;
  SpinConfig spins_;
  FkConfig omega_;
  std::vector<int> parent_;
  std::vector<std::int8_t> cluster_spin_;
};

/// Outer-face spins encoding a boundary source set: walk the outer boundary
/// counterclockwise from the edge with the smallest midpoint, start at +1 and
/// flip at the first visit of each source. Indexed like dual_of(g).faces;
/// interior faces get 0. Throws "unsupported source placement" for sources
/// off the boundary or placements that give one outer face two spins.
std::vector<std::int8_t> boundary_face_spins(const DomainGraph& g, const lattice::DualGraph& dual,
                                             const exact::SourceSet& sources);

/// Dual Ising at beta_c (self-dual point) with the outer faces frozen to the
/// boundary spins, updated by Swendsen-Wang. Its disagreement edges are
/// distributed as the parity of a critical current with the given sources.
class CurrentChain {
 public:
  /// Sources are vertex ids on the boundary of g. g must be connected,
  /// without holes and without merges.
  CurrentChain(const DomainGraph& g, const exact::SourceSet& sources, std::uint64_t seed);

  void advance(int sweeps);
  /// Trace of the current state; sprinkling uses its own stream, so the dual
  /// state depends only on (seed, sweeps_done).
  void sample_into(CurrentTrace& out);
  CurrentTrace sample();
  /// Like sample_into but only for the listed edges; other entries of `out`
  /// are left as they are (zero on first use).
  void sample_edges(std::span<const int> edges, CurrentTrace& out);

  const std::vector<std::int8_t>& face_spins() const { return spin_; }
  const lattice::DualGraph& dual() const { return dual_; }
  std::uint64_t seed() const { return seed_; }
  long sweeps_done() const { return sweeps_; }

 private:
  void sweep();

  const DomainGraph* g_;
  lattice::DualGraph dual_;
  std::vector<std::int8_t> fixed_;  // 0 for free faces
  std::vector<std::array<int, 2>> active_;  // dual edges touching a free face
  std::uint64_t seed_;
  long sweeps_ = 0;
  Engine eng_;
  Engine sprinkle_eng_;
  Bernoulli bond_;
  Bernoulli even_;
  std::vector<std::int8_t> spin_;
  std::vector<int> parent_;
  std::vector<std::int8_t> cluster_spin_;
};

FkConfig sample_fk(const DomainGraph& g, int sweeps, std::uint64_t seed);
/// Uniform sign per omega-cluster, constant on merge classes.
SpinConfig es_spins(const DomainGraph& g, const FkConfig& omega, std::uint64_t seed);
/// eta = edges whose two faces carry different spins; faces indexed as in `dual`.
std::vector<std::uint8_t> kw_contours(const DomainGraph& g, const lattice::DualGraph& dual,
                                      const std::vector<std::int8_t>& face_spins);
CurrentTrace sprinkle_even(const std::vector<std::uint8_t>& eta, std::uint64_t seed);
CurrentTrace sample_current(const DomainGraph& g, const exact::SourceSet& sources, int sweeps, std::uint64_t seed);
DoubleTrace double_current(const CurrentTrace& t1, const CurrentTrace& t2);
/// t2 lives on h, a subgraph of g; edges are matched by coordinates.
DoubleTrace double_current(const DomainGraph& g, const CurrentTrace& t1, const DomainGraph& h, const CurrentTrace& t2);
/// omega_e = positive_e or an independent Bernoulli(1 - sqrt(1 - p_c)).
FkConfig fk_from_current(const CurrentTrace& t, std::uint64_t seed);

}  // namespace currentlab::sampler
