#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "currentlab/lattice.hpp"

// Brute-force oracles on small graphs. Currents are reduced to their trace:
// the parity mask eta (edges with odd n_e) and the positivity mask. Vertices
// are merge classes; an edge inside a class is a loop and never changes
// the source set.
namespace currentlab::exact {

using Mask = std::uint64_t;

/// Source set as a sorted list of merge-class ids.
using SourceSet = std::vector<int>;

/// Resolves names ("x,y" or a merge-class name) to class ids, sorted.
SourceSet parse_sources(const lattice::DomainGraph& g, const std::vector<std::string>& names);
SourceSet sources_of(const lattice::DomainGraph& g, std::span<const Coord> coords);

/// Class-level multigraph view used by every enumeration.
struct ClassGraph {
  int num_vertices = 0;
  std::vector<std::array<int, 2>> ends;  // per domain edge, class ids

  explicit ClassGraph(const lattice::DomainGraph& g);
  int num_edges() const { return static_cast<int>(ends.size()); }
  /// Classes of odd degree in the edge set `eta`, sorted.
  SourceSet boundary_of(Mask eta) const;
};

/// Every eta with boundary equal to `sources`, in increasing mask order.
/// Throws if |sources| is odd or the graph has more than `cap` edges.
std::vector<Mask> parity_configs(const lattice::DomainGraph& g, const SourceSet& sources, int cap = 24);

struct ParityEntry {
  Mask odd = 0;
  double weight = 0.0;
};

struct ParityTable {
  std::vector<ParityEntry> entries;
  double total = 0.0;
};

/// Weights tanh(beta_c)^{|eta|}; total = Z^B(G) / cosh(beta_c)^{|E|}.
ParityTable enumerate_parity(const lattice::DomainGraph& g, const SourceSet& sources, int cap = 24);

/// <sigma_B>_G as a ratio of parity totals.
double correlation_exact(const lattice::DomainGraph& g, const SourceSet& sources, int cap = 24);
/// <sigma_B>_G by summing over spin configurations of the classes (<= 24 classes).
double correlation_spin_sum(const lattice::DomainGraph& g, const SourceSet& sources, double beta);

struct TraceEntry {
  Mask odd = 0;
  Mask positive = 0;
  double weight = 0.0;
};

struct TraceTable {
  std::vector<TraceEntry> entries;
  double total = 0.0;  // 1 after normalisation
  /// P(edge e positive) and P(e odd).
  double positive_marginal(int e) const;
  double odd_marginal(int e) const;
};

/// Normalised law of the trace of a critical current with the given sources.
TraceTable trace_distribution_exact(const lattice::DomainGraph& g, const SourceSet& sources, int cap = 14);

/// Integer-valued functional of the aggregate positivity mask of a double current.
using TraceFunctional = std::function<std::int64_t(Mask positive)>;

TraceFunctional functional_one();
TraceFunctional functional_edge_positive(int edge);
/// Number of clusters of the positive edges (isolated classes count).
TraceFunctional functional_cluster_count(const lattice::DomainGraph& g);

struct SwitchingOptions {
  bool formal = true;    // also compare exact coefficient vectors
  bool corrupt = false;  // fault injection: perturb one left-hand weight
  int cap = 14;
};

struct SwitchingResult {
  double lhs = 0.0;       // sum over (n1 on G with sources B, n2 on H with sources A)
  double rhs = 0.0;       // sum over (A xor B, empty) with the F_A indicator
  double residual = 0.0;  // |lhs - rhs| / max(1, |lhs|)
  bool formal_checked = false;
  bool formal_equal = true;
  /// Normalised form E^{A,B}[F] and the right-hand side, when defined.
  bool normalised = false;
  double expectation_lhs = 0.0;
  double expectation_rhs = 0.0;
};

/// Switching identity for H a subgraph of G (edges matched by coordinates),
/// A in H and B in G, both given as class ids of G.
SwitchingResult verify_switching_lemma(const lattice::DomainGraph& g, const lattice::DomainGraph& h,
                                       const SourceSet& a, const SourceSet& b,
                                       const TraceFunctional& f, const SwitchingOptions& opt = {});

/// Multigraph given as a list of individual edges (endpoints are vertex ids).
struct Multigraph {
  int num_vertices = 0;
  std::vector<std::array<int, 2>> edges;

  /// Expands an edge-multiplicity list {u, v, m}.
  static Multigraph from_multiplicities(int num_vertices, const std::vector<std::array<int, 3>>& edges);
  SourceSet boundary_of(std::uint32_t sub) const;
};

using MultiFunctional = std::function<double(std::uint32_t sub)>;

struct PrincipleResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  std::uint32_t k = 0;  // canonical K as a mask of individual edges
};

/// Throws Error("unswitchable") when no sub-multigraph has boundary A.
PrincipleResult verify_switching_principle(const Multigraph& m, const SourceSet& a, const MultiFunctional& f);

/// Parity of the flux through the listed primal edges.
int flux_parity(std::span<const int> crossed_edges, Mask eta);

struct FluxHalfResult {
  double residual = 0.0;   // max |P(n1-flux odd | aggregate) - 1/2|
  int qualifying = 0;      // aggregates that separate u from v
  int aggregates = 0;      // aggregates seen
};

/// Shortest dual path between faces u and v (keys = lower-left corners) in
/// a window one face wider than the domain; returns crossed domain edges.
std::vector<int> dual_path(const lattice::DomainGraph& g, Coord u, Coord v);
/// True when the positive edges separate face u from face v.
bool separates(const lattice::DomainGraph& g, Mask positive, Coord u, Coord v);

/// Conditional n1-flux parity law given the sourceless aggregate trace.
FluxHalfResult verify_flux_half(const lattice::DomainGraph& g, Coord u, Coord v, int cap = 14);

struct ParityReductionResult {
  double cosh_residual = 0.0;
  double sinh_residual = 0.0;
  double q_even_series = 0.0;
  double q_even_closed = 0.0;
  double residual() const;
};

/// Truncated series for sum_n beta^n / n! split by parity against cosh/sinh.
ParityReductionResult validate_parity_reduction(double beta, int e_cap);

}  // namespace currentlab::exact
