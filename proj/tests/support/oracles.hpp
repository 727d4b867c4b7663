#pragma once

// Independent oracles used only by tests: direct sums over integer currents
// truncated at n_e <= nmax, and small combinatorial helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "currentlab/lattice.hpp"
#include "currentlab/harmonic.hpp"

namespace oracle {

using Mask = std::uint64_t;

struct DirectKey {
  Mask sources;  // class bitmask
  Mask odd;
  Mask positive;
  auto operator<=>(const DirectKey&) const = default;
};

/// sum over currents with n_e <= nmax of prod beta^n/n! / cosh(beta)^{|E|}, keyed by trace.
inline std::map<DirectKey, double> direct_traces(const currentlab::lattice::DomainGraph& g, double beta, int nmax) {
  const int m = g.num_edges();
  std::vector<double> w(static_cast<std::size_t>(nmax + 1));
  double term = 1.0;
  for (int n = 0; n <= nmax; ++n) {
    w[static_cast<std::size_t>(n)] = term / std::cosh(beta);
    term *= beta / (n + 1);
  }
  std::map<DirectKey, double> out;
  std::vector<int> n(static_cast<std::size_t>(m), 0);
  while (true) {
    DirectKey k{0, 0, 0};
    double weight = 1.0;
    for (int e = 0; e < m; ++e) {
      const int ne = n[static_cast<std::size_t>(e)];
      weight *= w[static_cast<std::size_t>(ne)];
      if (ne > 0) k.positive |= Mask{1} << e;
      if (ne % 2) {
        k.odd |= Mask{1} << e;
        k.sources ^= Mask{1} << g.class_of(g.edge(e).u);
        k.sources ^= Mask{1} << g.class_of(g.edge(e).v);
      }
    }
    out[k] += weight;
    int i = 0;
    while (i < m && ++n[static_cast<std::size_t>(i)] > nmax) n[static_cast<std::size_t>(i++)] = 0;
    if (i == m) break;
  }
  return out;
}

inline Mask class_mask(const std::vector<int>& classes) {
  Mask s = 0;
  for (int c : classes) s ^= Mask{1} << c;
  return s;
}

/// Every connected edge subset of g, as lists of edge ids.
inline std::vector<std::vector<int>> connected_edge_subsets(const currentlab::lattice::DomainGraph& g) {
  const int m = g.num_edges();
  std::vector<std::vector<int>> out;
  for (Mask s = 1; s < (Mask{1} << m); ++s) {
    std::vector<int> ids;
    std::vector<int> parent(static_cast<std::size_t>(g.num_vertices()));
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int a) {
      while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
      return a;
    };
    std::vector<char> touched(parent.size(), 0);
    for (int e = 0; e < m; ++e) {
      if (!((s >> e) & 1)) continue;
      ids.push_back(e);
      const int a = g.edge(e).u, b = g.edge(e).v;
      touched[static_cast<std::size_t>(a)] = touched[static_cast<std::size_t>(b)] = 1;
      parent[static_cast<std::size_t>(find(a))] = find(b);
    }
    int roots = 0;
    for (std::size_t v = 0; v < parent.size(); ++v) {
      if (touched[v] && find(static_cast<int>(v)) == static_cast<int>(v)) ++roots;
    }
    if (roots == 1) out.push_back(ids);
  }
  return out;
}

/// Conductances of a quad built straight from the definition: unit weight
/// between neighbours in D, 2(sqrt2 - 1) per missing lattice neighbour of a
/// vertex on (bc) or (da). Returns (neighbour lists, m).
struct Walk {
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> m;
};

inline Walk quad_walk(const currentlab::lattice::Quad& q) {
  const auto& g = q.domain;
  const auto arc = q.arc_of_vertex();
  const double c = 2.0 * (std::sqrt(2.0) - 1.0);
  Walk w;
  w.adj.resize(static_cast<std::size_t>(g.num_vertices()));
  w.m.assign(static_cast<std::size_t>(g.num_vertices()), 0.0);
  for (int v = 0; v < g.num_vertices(); ++v) {
    const auto p = g.vertex(v);
    const currentlab::Coord nb[4] = {{p.x + 1, p.y}, {p.x - 1, p.y}, {p.x, p.y + 1}, {p.x, p.y - 1}};
    for (const auto& n : nb) {
      const int e = g.edge_between(p, n);
      const auto k = static_cast<std::size_t>(v);
      if (e >= 0) {
        w.adj[k].push_back({g.index_of(n), 1.0});
        w.m[k] += 1.0;
      } else if (!g.contains(n) && (arc[k] == 1 || arc[k] == 3)) {
        w.m[k] += c;
      }
    }
  }
  return w;
}

/// Walk of a conductance network as the library stores it.
inline Walk network_walk(const currentlab::harmonic::ConductanceNetwork& net) {
  Walk w;
  w.adj.resize(static_cast<std::size_t>(net.size()));
  w.m = net.total;
  for (const auto& [a, b] : net.links) {
    w.adj[static_cast<std::size_t>(a)].push_back({b, 1.0});
    w.adj[static_cast<std::size_t>(b)].push_back({a, 1.0});
  }
  return w;
}

/// Z[x, y] = sum over paths x = g_0, ..., g_k = y of prod_{i<k} w / m_{g_i},
/// times 1 / m_y, summed by path length until the mass left is below tol.
inline std::vector<double> path_sum(const Walk& w, int x, double tol = 1e-15, int max_len = 2000000) {
  const std::size_t n = w.m.size();
  std::vector<double> level(n, 0.0), next(n), z(n, 0.0);
  level[static_cast<std::size_t>(x)] = 1.0;
  for (int len = 0; len < max_len; ++len) {
    double mass = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      z[v] += level[v] / w.m[v];
      mass += level[v];
    }
    if (mass < tol) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      if (level[v] == 0.0) continue;
      for (const auto& [u, wt] : w.adj[v]) next[static_cast<std::size_t>(u)] += level[v] * wt / w.m[v];
    }
    level.swap(next);
  }
  return z;
}

}  // namespace oracle
