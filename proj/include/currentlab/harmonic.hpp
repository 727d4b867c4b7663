#pragma once

#include <array>
#include <span>
#include <vector>

#include "currentlab/lattice.hpp"

// Killed random walks with the mixed conductances 1 / 2(sqrt2 - 1) and the
// walk partition functions Z_D built on them.
namespace currentlab::harmonic {

/// Nodes are primal vertices or dual faces (lower-left corner keys). Links
/// carry unit conductance; `exit` is the total conductance of the edges that
/// leave the network at a node, so m = degree + exit.
struct ConductanceNetwork {
  std::vector<Coord> nodes;
  std::vector<std::array<int, 2>> links;
  std::vector<double> exit;
  std::vector<double> total;

  int size() const { return static_cast<int>(nodes.size()); }
  /// Node index of a coordinate, or -1.
  int index_of(Coord c) const;
  double m(Coord c) const;
  /// Every connected part of the network has a killed node.
  bool killed() const;
};

/// Unit conductance between vertices of D; 2(sqrt2 - 1) per edge leaving D
/// from a vertex of (bc) or (da); 0 for edges leaving D elsewhere.
ConductanceNetwork build_network(const lattice::Quad& q);

/// Same rule on the faces of D: interior faces plus the outer faces along the
/// boundary walk. Outer faces next to (ab) or (cd) edges are killed at
/// 2(sqrt2 - 1) per exit and the ones along (bc) or (da) reflect. For a quad
/// with empty (ab) and (cd) every outer face is killed.
ConductanceNetwork dual_network(const lattice::Quad& q);

struct Kernel {
  std::vector<double> z;   // indexed like net.nodes
  double residual = 0.0;   // relative residual of the linear solve
};

/// sum_{x in X} Z[x, .] by one conjugate-gradient solve of (M - W) z = 1_X.
/// Throws "walk not killed" when some part of the network never dies.
Kernel solve_kernel(const ConductanceNetwork& net, std::span<const int> sources);

double z_kernel(const ConductanceNetwork& net, Coord x, Coord y);
double z_sets(const ConductanceNetwork& net, std::span<const Coord> xs, std::span<const Coord> ys);

/// Expected visits to y from x: G(x, y) = Z[x, y] m_y.
double green(const ConductanceNetwork& net, Coord x, Coord y);

/// Effective resistance between (ab) and (cd) with unit conductances on the
/// edges of D; +infinity when the arcs are empty or not connected.
double extremal_distance_estimate(const lattice::Quad& q);

}  // namespace currentlab::harmonic
