#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "currentlab/lattice.hpp"
#include "currentlab/sampler.hpp"
#include "currentlab/union_find.hpp"

// Event detectors on double-current traces. Every detector is built once for
// a geometry (a "probe") and then evaluated on many samples.
namespace currentlab::clusters {

using lattice::DomainGraph;
using Bits = std::span<const std::uint8_t>;

/// Vertices of a domain selected by a predicate, with the domain edges that
/// join two selected vertices.
class Region {
 public:
  Region(const DomainGraph& g, const std::function<bool(Coord)>& keep);

  int size() const { return static_cast<int>(vertices_.size()); }
  std::span<const int> vertices() const { return vertices_; }
  /// Local index of a domain vertex, or -1.
  int local(int v) const { return local_[static_cast<std::size_t>(v)]; }
  /// Union-find over the region using edges whose bit is set.
  void label(Bits positive, UnionFind& uf) const;

 private:
  std::vector<int> vertices_;
  std::vector<int> local_;
  std::vector<std::array<int, 3>> edges_;  // local u, local v, domain edge
};

/// label[i] is the smallest local index in the cluster of region vertex i.
struct ClusterLabeling {
  std::vector<int> label;
  int num_clusters = 0;
};

/// Clusters of the positive edges restricted to `region` (a subgraph of g).
ClusterLabeling label_clusters(const DomainGraph& g, Bits positive, const DomainGraph& region);

/// Throws unless every vertex of Lambda_R(x) belongs to g.
void require_box(const DomainGraph& g, Coord x, int radius);

/// Ann(x, r, R)-clusters joining the inner square (|y - x| = r) to the outer one (= R).
class AnnulusClusters {
 public:
  AnnulusClusters(const DomainGraph& g, Coord x, int r, int R);
  int count(Bits positive);

 private:
  Region region_;
  std::vector<std::uint8_t> inner_, outer_;
  UnionFind uf_;
  std::vector<std::uint8_t> flags_;
};

/// Lambda_R(x)-clusters reaching the outer square of Lambda_R(x). For each
/// such cluster, the smallest sup-distance to x is reported, so A_4 box events
/// for every inner radius r come from one labelling.
class BoxArms {
 public:
  BoxArms(const DomainGraph& g, Coord x, int R);
  /// Sorted minimal distances of the clusters touching the outer square.
  std::vector<int> crossing_depths(Bits positive);
  /// At least two Lambda_R(x)-clusters meet Lambda_r(x) and the outer square.
  bool a4_square(Bits positive, int r);

 private:
  Region region_;
  std::vector<int> dist_;
  int R_;
  UnionFind uf_;
  std::vector<int> best_;
  std::vector<std::uint8_t> outer_;
};

struct HoleLabeling {
  std::vector<Coord> faces;   // lower-left corners
  std::vector<int> label;     // smallest local face index in the hole
  std::vector<int> crossing;  // labels of crossing holes, sorted
  int num_holes = 0;
};

struct HoleReport {
  int crossing_holes = 0;
  bool a4 = false;        // some pair with even (n1+n2)-flux
  bool any_odd = false;   // ... and odd n1-flux
  bool any_even = false;  // ... and even n1-flux
  bool has_pair = false;  // data of the closest pair of crossing holes
  int distance = 0;
  int aggregate_flux = 0;
  int n1_flux = 0;
  Coord face_a, face_b;  // one face of each hole of the closest pair
};

/// True when the parity bits have odd-degree vertices; hole fluxes may then
/// depend on the chosen dual path.
bool has_sources(const DomainGraph& g, Bits parity);

/// Holes of Ann(x, r, R): components of faces with centre at sup-distance
/// between r - 1/2 and R + 1/2 from x, joined through dual edges of annulus
/// edges carrying zero aggregate current. A hole crosses when it meets both
/// the r - 1/2 and the R + 1/2 rings.
class HoleProbe {
 public:
  HoleProbe(const DomainGraph& g, Coord x, int r, int R);

  HoleLabeling label(Bits positive);
  HoleReport analyse(const sampler::DoubleTrace& dc);
  /// Crossed domain edges of the shortest dual path between two holes.
  std::vector<int> shortest_path(const HoleLabeling& holes, int from_label, int to_label) const;
  /// Same endpoints, but a different tie-break (reverse neighbour order).
  std::vector<int> alternate_path(const HoleLabeling& holes, int from_label, int to_label) const;

 private:
  std::vector<int> bfs_path(const HoleLabeling& holes, int from_label, int to_label, bool reverse) const;

  const DomainGraph* g_;
  std::vector<Coord> faces_;
  std::vector<std::uint8_t> inner_, outer_;
  std::vector<std::array<int, 3>> dual_;  // face a, face b, domain edge
  std::vector<int> adj_start_;
  std::vector<std::array<int, 2>> adj_;   // neighbour face, domain edge
  UnionFind uf_;
};

/// Components of the whole dual of g through edges with zero aggregate
/// current; the faces outside g form a single node. Two annulus holes in the
/// same component are joined outside the annulus.
class DualComponents {
 public:
  explicit DualComponents(const DomainGraph& g);
  void label(Bits positive);
  /// Faces are lower-left corner keys; both must be faces of dual_of(g).
  bool same(Coord a, Coord b);

 private:
  const DomainGraph* g_;
  lattice::DualGraph dual_;
  UnionFind uf_;
};

struct CrossingReport {
  int k_clusters = 0;
  int k_holes = 0;
};

CrossingReport count_annulus_crossings(const DomainGraph& g, const sampler::DoubleTrace& dc, const lattice::Annulus& ann);
bool detect_a4_square(const DomainGraph& g, const sampler::DoubleTrace& dc, Coord x, int r, int R);
HoleLabeling label_holes(const DomainGraph& g, const sampler::DoubleTrace& dc, const lattice::Annulus& ann);
enum class A4Hole { None, Even, Odd };
/// Closest pair classification (None when no pair passes the even-flux gate).
A4Hole detect_a4_blacksquare(const DomainGraph& g, const sampler::DoubleTrace& dc, Coord x, int r, int R);

struct SepResult {
  bool holds = true;
  bool vacuous = false;
  int inner = 0;
  int outer = 0;
};

/// Sep_delta(r): no x with |x| = r has A_4 box at scales (floor(delta r), floor(r / 4)).
SepResult detect_sep(const DomainGraph& g, Bits positive, int r, double delta);

/// Some cluster meets Lambda_R and the r-neighbourhood of the boundary.
class BoundaryProbe {
 public:
  BoundaryProbe(const DomainGraph& g, int R, int r);
  bool connected(Bits positive);

 private:
  const DomainGraph* g_;
  std::vector<int> inner_;
  std::vector<int> near_boundary_;
  UnionFind uf_;
  std::vector<std::uint8_t> mark_;
};

bool boundary_connection(const DomainGraph& g, Bits positive, int R, int r);

/// Number of eta-clusters crossing the annulus.
int count_b2k_odd(const DomainGraph& g, Bits eta, const lattice::Annulus& ann);

/// Clusters of the rectangle [o, o + (w, h)] joining its left and right columns.
class RectangleCrossings {
 public:
  RectangleCrossings(const DomainGraph& g, Coord origin, int width, int height);
  int count(Bits positive);

 private:
  Region region_;
  std::vector<std::uint8_t> left_, right_;
  UnionFind uf_;
  std::vector<std::uint8_t> flags_;
};

int count_rectangle_crossings(const DomainGraph& g, Bits positive, Coord origin, int width, int height);

/// Boxes Lambda_r(x) of the boundary layer (x in rZ^2, inside the box
/// cover of the domain, Lambda_3r(x) not inside it); n counts those connected
/// to Lambda_R.
struct BoxCounts {
  int boxes = 0;
  int n = 0;
};

class BoundaryBoxes {
 public:
  BoundaryBoxes(const DomainGraph& g, int R, int r);
  std::span<const Coord> centres() const { return centres_; }
  BoxCounts evaluate(Bits positive);

 private:
  const DomainGraph* g_;
  std::vector<Coord> centres_;
  std::vector<int> inner_;
  std::vector<std::vector<int>> box_;
  UnionFind uf_;
  std::vector<std::uint8_t> mark_;
};

}  // namespace currentlab::clusters
