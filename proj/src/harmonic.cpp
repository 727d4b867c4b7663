#include "currentlab/harmonic.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <limits>
#include <map>

#include "currentlab/critical.hpp"
#include "currentlab/union_find.hpp"

namespace currentlab::harmonic {

namespace {

std::size_t uz(int i) { return static_cast<std::size_t>(i); }

constexpr std::array<Coord, 4> kSteps{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

using SpMat = Eigen::SparseMatrix<double>;

SpMat operator_of(const ConductanceNetwork& net) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(uz(net.size() + 2 * static_cast<int>(net.links.size())));
  for (int i = 0; i < net.size(); ++i) t.emplace_back(i, i, net.total[uz(i)]);
  for (const auto& [a, b] : net.links) {
    t.emplace_back(a, b, -1.0);
    t.emplace_back(b, a, -1.0);
  }
  SpMat m(net.size(), net.size());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void finish(ConductanceNetwork& net) {
  net.total = net.exit;
  for (const auto& [a, b] : net.links) {
    net.total[uz(a)] += 1.0;
    net.total[uz(b)] += 1.0;
  }
}

}  // namespace

int ConductanceNetwork::index_of(Coord c) const {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), c);
  return it != nodes.end() && *it == c ? static_cast<int>(it - nodes.begin()) : -1;
}

double ConductanceNetwork::m(Coord c) const {
  const int i = index_of(c);
  if (i < 0) throw Error("node " + to_string(c) + " is not in the network");
  return total[uz(i)];
}

bool ConductanceNetwork::killed() const {
  UnionFind uf(size());
  for (const auto& [a, b] : links) uf.unite(a, b);
  std::vector<std::uint8_t> dies(uz(size()), 0);
  for (int i = 0; i < size(); ++i) {
    if (exit[uz(i)] > 0.0) dies[uz(uf.find(i))] = 1;
  }
  for (int i = 0; i < size(); ++i) {
    if (!dies[uz(uf.find(i))]) return false;
  }
  return true;
}

ConductanceNetwork build_network(const lattice::Quad& q) {
  lattice::validate_quad(q);
  const auto& g = q.domain;
  const auto arc = q.arc_of_vertex();
  const double c = critical::exit_conductance();
  ConductanceNetwork net;
  net.nodes.assign(g.vertices().begin(), g.vertices().end());
  net.exit.assign(net.nodes.size(), 0.0);
  for (const Edge& e : g.edges()) net.links.push_back({e.u, e.v});
  for (int v = 0; v < g.num_vertices(); ++v) {
    const int a = arc[uz(v)];
    if (a != static_cast<int>(lattice::Arc::BC) && a != static_cast<int>(lattice::Arc::DA)) continue;
    for (const Coord s : kSteps) {
      if (!g.contains(g.vertex(v) + s)) net.exit[uz(v)] += c;
    }
  }
  finish(net);
  return net;
}

ConductanceNetwork dual_network(const lattice::Quad& q) {
  lattice::validate_quad(q);
  const auto& g = q.domain;
  const auto dual = lattice::dual_of(g);
  const auto arc = q.arc_of_vertex();
  const bool free_quad = q.arc(lattice::Arc::AB).empty() && q.arc(lattice::Arc::CD).empty();

  // Faces are keyed by lower-left corner; dual_of lists them in grid order,
  // so sort to get a lookup by coordinate.
  std::vector<int> order(uz(dual.num_faces()));
  for (int i = 0; i < dual.num_faces(); ++i) order[uz(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return dual.faces[uz(a)] < dual.faces[uz(b)]; });
  std::vector<int> rank(order.size());
  ConductanceNetwork net;
  for (std::size_t k = 0; k < order.size(); ++k) {
    rank[uz(order[k])] = static_cast<int>(k);
    net.nodes.push_back(dual.faces[uz(order[k])]);
  }
  for (const auto& [a, b] : dual.dual_edges) net.links.push_back({rank[uz(a)], rank[uz(b)]});

  std::vector<std::uint8_t> kill(net.nodes.size(), 0);
  for (const auto& step : lattice::boundary_walk(g)) {
    const int f = rank[uz(dual.index_of(step.right_face))];
    const int au = arc[uz(step.from)];
    const int av = arc[uz(step.to)];
    const auto wired = [](int a) { return a == static_cast<int>(lattice::Arc::AB) || a == static_cast<int>(lattice::Arc::CD); };
    if (free_quad || (au == av && wired(au))) kill[uz(f)] = 1;
  }
  const double c = critical::exit_conductance();
  net.exit.assign(net.nodes.size(), 0.0);
  for (int i = 0; i < net.size(); ++i) {
    if (!kill[uz(i)]) continue;
    for (const Coord s : kSteps) {
      if (net.index_of(net.nodes[uz(i)] + s) < 0) net.exit[uz(i)] += c;
    }
  }
  finish(net);
  return net;
}

Kernel solve_kernel(const ConductanceNetwork& net, std::span<const int> sources) {
  if (net.size() == 0) throw Error("empty network");
  if (!net.killed()) throw Error("walk not killed");
  Kernel out;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(net.size());
  for (int s : sources) {
    if (s < 0 || s >= net.size()) throw Error("source outside the network");
    rhs[s] += 1.0;
  }
  out.z.assign(uz(net.size()), 0.0);
  if (rhs.isZero()) return out;
  const SpMat a = operator_of(net);
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-13);
  cg.setMaxIterations(std::max(1000, 20 * net.size()));
  cg.compute(a);
  const Eigen::VectorXd z = cg.solve(rhs);
  out.residual = (a * z - rhs).norm() / rhs.norm();
  if (cg.info() != Eigen::Success && out.residual > 1e-9) throw Error("linear solve did not converge");
  for (int i = 0; i < net.size(); ++i) out.z[uz(i)] = z[i];
  return out;
}

double z_kernel(const ConductanceNetwork& net, Coord x, Coord y) {
  const int xi = net.index_of(x);
  const int yi = net.index_of(y);
  if (xi < 0 || yi < 0) throw Error("point outside the network");
  const int src[1] = {xi};
  return solve_kernel(net, src).z[uz(yi)];
}

double z_sets(const ConductanceNetwork& net, std::span<const Coord> xs, std::span<const Coord> ys) {
  if (xs.empty() || ys.empty()) return 0.0;
  std::vector<int> src;
  for (Coord c : xs) {
    const int i = net.index_of(c);
    if (i < 0) throw Error("point outside the network");
    src.push_back(i);
  }
  const auto k = solve_kernel(net, src);
  double sum = 0.0;
  for (Coord c : ys) {
    const int i = net.index_of(c);
    if (i < 0) throw Error("point outside the network");
    sum += k.z[uz(i)];
  }
  return sum;
}

double green(const ConductanceNetwork& net, Coord x, Coord y) { return z_kernel(net, x, y) * net.m(y); }

double extremal_distance_estimate(const lattice::Quad& q) {
  lattice::validate_quad(q);
  const auto& g = q.domain;
  const double inf = std::numeric_limits<double>::infinity();
  const auto& ab = q.arc(lattice::Arc::AB);
  const auto& cd = q.arc(lattice::Arc::CD);
  if (ab.empty() || cd.empty()) return inf;
  UnionFind uf(g.num_vertices());
  for (const Edge& e : g.edges()) uf.unite(e.u, e.v);
  std::vector<std::uint8_t> on_ab(uz(g.num_vertices()), 0), touches_ab(uz(g.num_vertices()), 0);
  for (int v : ab) {
    on_ab[uz(v)] = 1;
    touches_ab[uz(uf.find(v))] = 1;
  }
  std::vector<double> fixed(uz(g.num_vertices()), -1.0);
  for (int v : ab) fixed[uz(v)] = 1.0;
  bool joined = false;
  std::vector<std::uint8_t> touches_cd(uz(g.num_vertices()), 0);
  for (int v : cd) {
    fixed[uz(v)] = 0.0;
    touches_cd[uz(uf.find(v))] = 1;
    joined = joined || touches_ab[uz(uf.find(v))];
  }
  if (!joined) return inf;

  // Unknowns: free vertices in components that touch both arcs.
  std::vector<int> idx(uz(g.num_vertices()), -1);
  int n = 0;
  for (int v = 0; v < g.num_vertices(); ++v) {
    const int root = uf.find(v);
    if (fixed[uz(v)] < 0 && touches_ab[uz(root)] && touches_cd[uz(root)]) idx[uz(v)] = n++;
  }
  std::vector<double> phi(fixed);
  if (n > 0) {
    std::vector<Eigen::Triplet<double>> t;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (const Edge& e : g.edges()) {
      const int a = idx[uz(e.u)];
      const int b = idx[uz(e.v)];
      if (a >= 0) t.emplace_back(a, a, 1.0);
      if (b >= 0) t.emplace_back(b, b, 1.0);
      if (a >= 0 && b >= 0) {
        t.emplace_back(a, b, -1.0);
        t.emplace_back(b, a, -1.0);
      } else if (a >= 0 && fixed[uz(e.v)] >= 0) {
        rhs[a] += fixed[uz(e.v)];
      } else if (b >= 0 && fixed[uz(e.u)] >= 0) {
        rhs[b] += fixed[uz(e.u)];
      }
    }
    SpMat lap(n, n);
    lap.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLDLT<SpMat> ldlt(lap);
    if (ldlt.info() != Eigen::Success) throw Error("resistance system is singular");
    const Eigen::VectorXd x = ldlt.solve(rhs);
    for (int v = 0; v < g.num_vertices(); ++v) {
      if (idx[uz(v)] >= 0) phi[uz(v)] = x[idx[uz(v)]];
    }
  }
  double current = 0.0;
  for (const Edge& e : g.edges()) {
    if (on_ab[uz(e.u)] != on_ab[uz(e.v)]) {
      const int other = on_ab[uz(e.u)] ? e.v : e.u;
      current += 1.0 - phi[uz(other)];
    }
  }
  return current > 0.0 ? 1.0 / current : inf;
}

}  // namespace currentlab::harmonic
