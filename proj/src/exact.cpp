#include "currentlab/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

#include "currentlab/critical.hpp"
#include "currentlab/union_find.hpp"

namespace currentlab::exact {

using lattice::DomainGraph;

namespace {

Mask bit(int e) { return Mask{1} << e; }

void check_cap(int edges, int cap) {
  if (edges > cap) {
    throw Error("graph has " + std::to_string(edges) + " edges, above the enumeration cap " + std::to_string(cap));
  }
  if (edges > 63) throw Error("enumeration supports at most 63 edges");
}

// Toggles class parities: a class is a source iff it receives an odd count.
SourceSet toggle_classes(const std::vector<int>& classes) {
  std::map<int, int> count;
  for (int c : classes) count[c] ^= 1;
  SourceSet out;
  for (auto [c, odd] : count) {
    if (odd) out.push_back(c);
  }
  return out;
}

// Cycle-space enumeration of {eta within `edges` : boundary(eta) = sources}.
std::vector<Mask> parity_configs_masked(const ClassGraph& cg, Mask edges, const SourceSet& sources) {
  if (sources.size() % 2 != 0) throw Error("source set has odd cardinality");
  const int n = cg.num_vertices;
  UnionFind uf(n);
  std::vector<std::vector<std::pair<int, int>>> tree(static_cast<std::size_t>(n));
  std::vector<int> extra;
  for (int e = 0; e < cg.num_edges(); ++e) {
    if (!(edges & bit(e))) continue;
    const auto [a, b] = cg.ends[static_cast<std::size_t>(e)];
    if (uf.unite(a, b)) {
      tree[static_cast<std::size_t>(a)].push_back({b, e});
      tree[static_cast<std::size_t>(b)].push_back({a, e});
    } else {
      extra.push_back(e);
    }
  }

  // Root every tree, recording parent edges in BFS order.
  std::vector<int> parent(static_cast<std::size_t>(n), -1), parent_edge(static_cast<std::size_t>(n), -1),
      depth(static_cast<std::size_t>(n), -1), order;
  for (int r = 0; r < n; ++r) {
    if (depth[static_cast<std::size_t>(r)] >= 0) continue;
    depth[static_cast<std::size_t>(r)] = 0;
    order.push_back(r);
    for (std::size_t i = order.size() - 1; i < order.size(); ++i) {
      const int v = order[i];
      for (auto [w, e] : tree[static_cast<std::size_t>(v)]) {
        if (depth[static_cast<std::size_t>(w)] >= 0) continue;
        depth[static_cast<std::size_t>(w)] = depth[static_cast<std::size_t>(v)] + 1;
        parent[static_cast<std::size_t>(w)] = v;
        parent_edge[static_cast<std::size_t>(w)] = e;
        order.push_back(w);
      }
    }
  }

  std::vector<int> demand(static_cast<std::size_t>(n), 0);
  for (int s : sources) {
    if (s < 0 || s >= n) throw Error("source class out of range");
    demand[static_cast<std::size_t>(s)] ^= 1;
  }
  Mask eta0 = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    if (!demand[static_cast<std::size_t>(v)]) continue;
    if (parent[static_cast<std::size_t>(v)] < 0) return {};  // odd demand in a component
    eta0 ^= bit(parent_edge[static_cast<std::size_t>(v)]);
    demand[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])] ^= 1;
  }

  std::vector<Mask> cycles;
  for (int f : extra) {
    Mask c = bit(f);
    int a = cg.ends[static_cast<std::size_t>(f)][0];
    int b = cg.ends[static_cast<std::size_t>(f)][1];
    while (a != b) {
      if (depth[static_cast<std::size_t>(a)] < depth[static_cast<std::size_t>(b)]) std::swap(a, b);
      c ^= bit(parent_edge[static_cast<std::size_t>(a)]);
      a = parent[static_cast<std::size_t>(a)];
    }
    cycles.push_back(c);
  }
  if (cycles.size() > 30) throw Error("cycle space too large to enumerate");

  std::vector<Mask> out;
  out.reserve(std::size_t{1} << cycles.size());
  Mask cur = eta0;
  out.push_back(cur);
  for (std::uint64_t i = 1; i < (std::uint64_t{1} << cycles.size()); ++i) {
    cur ^= cycles[static_cast<std::size_t>(std::countr_zero(i))];  // Gray code step
    out.push_back(cur);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Mask all_edges(int m) { return m == 64 ? ~Mask{0} : (bit(m) - 1); }

int clusters_of(const ClassGraph& cg, Mask positive, UnionFind& uf) {
  uf.reset(cg.num_vertices);
  int k = cg.num_vertices;
  for (Mask p = positive; p; p &= p - 1) {
    const auto& en = cg.ends[static_cast<std::size_t>(std::countr_zero(p))];
    if (uf.unite(en[0], en[1])) --k;
  }
  return k;
}

}  // namespace

ClassGraph::ClassGraph(const DomainGraph& g) : num_vertices(g.num_classes()) {
  ends.reserve(static_cast<std::size_t>(g.num_edges()));
  for (const Edge& e : g.edges()) ends.push_back({g.class_of(e.u), g.class_of(e.v)});
}

SourceSet ClassGraph::boundary_of(Mask eta) const {
  std::vector<int> hits;
  for (Mask p = eta; p; p &= p - 1) {
    const auto& en = ends[static_cast<std::size_t>(std::countr_zero(p))];
    hits.push_back(en[0]);
    hits.push_back(en[1]);
  }
  return toggle_classes(hits);
}

SourceSet parse_sources(const DomainGraph& g, const std::vector<std::string>& names) {
  std::vector<int> classes;
  for (const auto& name : names) {
    int c = g.class_by_name(name);
    if (c < 0) {
      std::istringstream ss(name);
      Coord p;
      char comma = 0;
      if (ss >> p.x >> comma >> p.y && comma == ',' && g.contains(p)) c = g.class_of(g.index_of(p));
    }
    if (c < 0) throw Error("unknown source '" + name + "'");
    classes.push_back(c);
  }
  return toggle_classes(classes);
}

SourceSet sources_of(const DomainGraph& g, std::span<const Coord> coords) {
  std::vector<int> classes;
  for (int v : g.indices_of(coords)) classes.push_back(g.class_of(v));
  return toggle_classes(classes);
}

std::vector<Mask> parity_configs(const DomainGraph& g, const SourceSet& sources, int cap) {
  check_cap(g.num_edges(), cap);
  const ClassGraph cg(g);
  return parity_configs_masked(cg, all_edges(g.num_edges()), sources);
}

ParityTable enumerate_parity(const DomainGraph& g, const SourceSet& sources, int cap) {
  const double t = critical::tanh_beta_c();
  ParityTable table;
  for (Mask eta : parity_configs(g, sources, cap)) {
    const double w = std::pow(t, std::popcount(eta));
    table.entries.push_back({eta, w});
    table.total += w;
  }
  return table;
}

double correlation_exact(const DomainGraph& g, const SourceSet& sources, int cap) {
  return enumerate_parity(g, sources, cap).total / enumerate_parity(g, {}, cap).total;
}

double correlation_spin_sum(const DomainGraph& g, const SourceSet& sources, double beta) {
  const ClassGraph cg(g);
  if (cg.num_vertices > 24) throw Error("spin enumeration limited to 24 classes");
  Mask src = 0;
  for (int s : sources) src |= bit(s);
  double num = 0.0;
  double den = 0.0;
  for (Mask s = 0; s < bit(cg.num_vertices); ++s) {
    int energy = 0;
    for (const auto& en : cg.ends) {
      energy += (((s >> en[0]) ^ (s >> en[1])) & 1) ? -1 : 1;
    }
    const double w = std::exp(beta * energy);
    den += w;
    num += (std::popcount(s & src) % 2 ? -w : w);
  }
  return num / den;
}

double TraceTable::positive_marginal(int e) const {
  double p = 0.0;
  for (const auto& en : entries) {
    if (en.positive & bit(e)) p += en.weight;
  }
  return p / total;
}

double TraceTable::odd_marginal(int e) const {
  double p = 0.0;
  for (const auto& en : entries) {
    if (en.odd & bit(e)) p += en.weight;
  }
  return p / total;
}

TraceTable trace_distribution_exact(const DomainGraph& g, const SourceSet& sources, int cap) {
  check_cap(g.num_edges(), cap);
  const double beta = critical::beta_c();
  const double t = std::tanh(beta);
  const double zero = 1.0 / std::cosh(beta);
  const double pos = 1.0 - zero;
  const Mask all = all_edges(g.num_edges());
  TraceTable table;
  for (Mask eta : parity_configs(g, sources, cap)) {
    const Mask free = all & ~eta;
    const int nfree = std::popcount(free);
    const double base = std::pow(t, std::popcount(eta));
    Mask s = 0;
    do {
      const int k = std::popcount(s);
      const double w = base * std::pow(pos, k) * std::pow(zero, nfree - k);
      table.entries.push_back({eta, eta | s, w});
      table.total += w;
      s = (s - free) & free;
    } while (s != 0);
  }
  for (auto& en : table.entries) en.weight /= table.total;
  table.total = 1.0;
  return table;
}

TraceFunctional functional_one() {
  return [](Mask) { return std::int64_t{1}; };
}

TraceFunctional functional_edge_positive(int edge) {
  return [edge](Mask p) { return static_cast<std::int64_t>((p >> edge) & 1); };
}

TraceFunctional functional_cluster_count(const DomainGraph& g) {
  return [cg = ClassGraph(g), uf = UnionFind()](Mask p) mutable {
    return static_cast<std::int64_t>(clusters_of(cg, p, uf));
  };
}

namespace {

using Poly = std::vector<std::int64_t>;

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Poly poly_pow(const Poly& a, int k) {
  Poly out{1};
  for (int i = 0; i < k; ++i) out = poly_mul(out, a);
  return out;
}

void poly_add_scaled(Poly& acc, const Poly& p, std::int64_t s) {
  if (acc.size() < p.size()) acc.resize(p.size(), 0);
  for (std::size_t i = 0; i < p.size(); ++i) acc[i] += s * p[i];
}

void poly_trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

// Edge categories of a pair (eta1 on G, eta2 on H) with aggregate positivity P.
struct Key {
  int h_zero, h_single, h_double, n_zero, n_odd;
  auto operator<=>(const Key&) const = default;
};

using KeyTable = std::map<Key, std::int64_t>;

struct PairSums {
  KeyTable lhs;
  KeyTable rhs;
};

}  // namespace

SwitchingResult verify_switching_lemma(const DomainGraph& g, const DomainGraph& h, const SourceSet& a,
                                       const SourceSet& b, const TraceFunctional& f,
                                       const SwitchingOptions& opt) {
  check_cap(g.num_edges(), opt.cap);
  const ClassGraph cg(g);
  const int m = g.num_edges();
  const Mask gm = all_edges(m);

  Mask hm = 0;
  for (const Edge& e : h.edges()) {
    const int ge = g.edge_between(h.vertex(e.u), h.vertex(e.v));
    if (ge < 0) throw Error("H is not a subgraph of G");
    hm |= bit(ge);
  }
  std::vector<std::uint8_t> in_h(static_cast<std::size_t>(cg.num_vertices), 0);
  for (const Coord& c : h.vertices()) {
    const int v = g.index_of(c);
    if (v < 0) throw Error("H is not a subgraph of G");
    in_h[static_cast<std::size_t>(g.class_of(v))] = 1;
  }
  for (int s : a) {
    if (s < 0 || s >= cg.num_vertices || !in_h[static_cast<std::size_t>(s)]) throw Error("source set A is not inside H");
  }
  const Mask nm = gm & ~hm;

  SourceSet ab;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(ab));

  // Functional and F_A indicator per positivity mask.
  std::vector<std::int64_t> fval(std::size_t{1} << m);
  std::vector<std::uint8_t> in_fa(std::size_t{1} << m);
  {
    UnionFind uf;
    std::vector<int> count(static_cast<std::size_t>(cg.num_vertices));
    for (Mask p = 0; p <= gm; ++p) {
      fval[p] = f(p);
      clusters_of(cg, p & hm, uf);
      std::fill(count.begin(), count.end(), 0);
      for (int s : a) count[static_cast<std::size_t>(uf.find(s))] ^= 1;
      in_fa[p] = std::none_of(count.begin(), count.end(), [](int c) { return c != 0; });
    }
  }

  auto accumulate = [&](const std::vector<Mask>& c1, const std::vector<Mask>& c2, bool with_fa, KeyTable& out) {
    for (Mask e1 : c1) {
      for (Mask e2 : c2) {
        const Mask forced = e1 | e2;
        const Mask free = gm & ~forced;
        const int h_single = std::popcount(hm & (e1 ^ e2));
        const int h_double = std::popcount(hm & e1 & e2);
        const int n_odd = std::popcount(nm & e1);
        Mask s = 0;
        do {
          const Mask p = forced | s;
          if (!with_fa || in_fa[p]) {
            const std::int64_t v = fval[p];
            if (v != 0) {
              const Key k{std::popcount(hm & ~p), h_single, h_double, std::popcount(nm & ~p), n_odd};
              out[k] += v;
            }
          }
          s = (s - free) & free;
        } while (s != 0);
      }
    }
  };

  PairSums sums;
  accumulate(parity_configs_masked(cg, gm, b), parity_configs_masked(cg, hm, a), false, sums.lhs);
  accumulate(parity_configs_masked(cg, gm, ab), parity_configs_masked(cg, hm, {}), true, sums.rhs);

  const int nh = std::popcount(hm);
  const int nn = std::popcount(nm);
  const double beta = critical::beta_c();
  const double t = std::tanh(beta);
  const double z = 1.0 / std::cosh(beta);

  auto weight = [&](const Key& k, double tt) {
    const int h_pos = nh - k.h_zero - k.h_single - k.h_double;
    const int n_pos = nn - k.n_zero - k.n_odd;
    return std::pow(z * z, k.h_zero) * std::pow(tt, k.h_single) * std::pow(tt * tt, k.h_double) *
           std::pow(1.0 - z * z, h_pos) * std::pow(z, k.n_zero) * std::pow(1.0 - z, n_pos) * std::pow(tt, k.n_odd);
  };

  SwitchingResult res;
  const double t_lhs = opt.corrupt ? t * (1.0 + 1e-6) : t;
  for (const auto& [k, v] : sums.lhs) res.lhs += static_cast<double>(v) * weight(k, t_lhs);
  for (const auto& [k, v] : sums.rhs) res.rhs += static_cast<double>(v) * weight(k, t);
  res.residual = std::abs(res.lhs - res.rhs) / std::max(1.0, std::abs(res.lhs));

  if (opt.formal) {
    // Per-edge weights times (1 + u^2) per current, u = tanh(beta / 2).
    const Poly one_minus{1, 0, -1};
    const Poly four_u2{0, 0, 4};
    const Poly two_u2{0, 0, 2};
    const Poly two_u{0, 2};
    const Poly single = opt.corrupt ? Poly{0, 2, 0, 3} : Poly{0, 2, 0, 2};
    auto poly_of = [&](const Key& k, const Poly& single_w) {
      const int h_pos = nh - k.h_zero - k.h_single - k.h_double;
      const int n_pos = nn - k.n_zero - k.n_odd;
      Poly p = poly_pow(one_minus, 2 * k.h_zero + k.n_zero);
      p = poly_mul(p, poly_pow(single_w, k.h_single));
      p = poly_mul(p, poly_pow(four_u2, k.h_double + h_pos));
      p = poly_mul(p, poly_pow(two_u2, n_pos));
      p = poly_mul(p, poly_pow(two_u, k.n_odd));
      return p;
    };
    Poly lhs, rhs;
    for (const auto& [k, v] : sums.lhs) poly_add_scaled(lhs, poly_of(k, single), v);
    for (const auto& [k, v] : sums.rhs) poly_add_scaled(rhs, poly_of(k, Poly{0, 2, 0, 2}), v);
    poly_trim(lhs);
    poly_trim(rhs);
    res.formal_checked = true;
    res.formal_equal = lhs == rhs;
  }

  const double zb_g = enumerate_parity(g, b, opt.cap).total;
  const double za_h = [&] {
    double tot = 0.0;
    for (Mask eta : parity_configs_masked(cg, hm, a)) tot += std::pow(t, std::popcount(eta));
    return tot;
  }();
  if (zb_g > 0.0 && za_h > 0.0) {
    const double zab_g = enumerate_parity(g, ab, opt.cap).total;
    const double z0_h = [&] {
      double tot = 0.0;
      for (Mask eta : parity_configs_masked(cg, hm, {})) tot += std::pow(t, std::popcount(eta));
      return tot;
    }();
    const double z0_g = enumerate_parity(g, {}, opt.cap).total;
    const double corr_ab = zab_g / z0_g;
    const double corr_b = zb_g / z0_g;
    const double corr_a_h = za_h / z0_h;
    res.normalised = true;
    res.expectation_lhs = res.lhs / (zb_g * za_h);
    res.expectation_rhs = zab_g > 0.0 ? corr_ab / (corr_b * corr_a_h) * (res.rhs / (zab_g * z0_h)) : 0.0;
  }
  return res;
}

Multigraph Multigraph::from_multiplicities(int num_vertices, const std::vector<std::array<int, 3>>& edges) {
  Multigraph m;
  m.num_vertices = num_vertices;
  for (const auto& [u, v, k] : edges) {
    if (u < 0 || v < 0 || u >= num_vertices || v >= num_vertices || k < 0) throw Error("bad multigraph edge");
    for (int i = 0; i < k; ++i) m.edges.push_back({u, v});
  }
  return m;
}

SourceSet Multigraph::boundary_of(std::uint32_t sub) const {
  std::vector<int> hits;
  for (std::uint32_t p = sub; p; p &= p - 1) {
    const auto& en = edges[static_cast<std::size_t>(std::countr_zero(p))];
    hits.push_back(en[0]);
    hits.push_back(en[1]);
  }
  return toggle_classes(hits);
}

PrincipleResult verify_switching_principle(const Multigraph& mg, const SourceSet& a, const MultiFunctional& f) {
  const int m = static_cast<int>(mg.edges.size());
  if (m > 20) throw Error("multigraph exceeds total multiplicity 20");
  if (mg.num_vertices > 32) throw Error("multigraph has too many vertices");
  std::uint32_t target = 0;
  for (int s : a) target ^= std::uint32_t{1} << s;

  const std::size_t n = std::size_t{1} << m;
  std::vector<std::uint32_t> bd(n, 0);
  for (std::size_t s = 1; s < n; ++s) {
    const auto& en = mg.edges[static_cast<std::size_t>(std::countr_zero(s))];
    bd[s] = bd[s & (s - 1)] ^ (std::uint32_t{1} << en[0]) ^ (std::uint32_t{1} << en[1]);
  }
  PrincipleResult res;
  const auto k = std::find(bd.begin(), bd.end(), target);
  if (k == bd.end()) throw Error("unswitchable");
  res.k = static_cast<std::uint32_t>(k - bd.begin());
  for (std::size_t s = 0; s < n; ++s) {
    const auto sub = static_cast<std::uint32_t>(s);
    if (bd[s] == target) res.lhs += f(sub);
    if (bd[s] == 0) res.rhs += f(sub ^ res.k);
  }
  res.residual = std::abs(res.lhs - res.rhs) / std::max(1.0, std::abs(res.lhs));
  return res;
}

int flux_parity(std::span<const int> crossed_edges, Mask eta) {
  int p = 0;
  for (int e : crossed_edges) {
    if (e < 0 || e > 63) throw Error("dual edge outside the domain");
    p ^= static_cast<int>((eta >> e) & 1);
  }
  return p;
}

namespace {

// Faces in a window around the domain; crossing between neighbouring faces
// goes through one Z^2 edge, which may or may not belong to the domain.
struct FaceWindow {
  Coord lo, hi;
  int width() const { return hi.x - lo.x + 1; }
  int height() const { return hi.y - lo.y + 1; }
  int id(Coord f) const { return (f.x - lo.x) * height() + (f.y - lo.y); }
  Coord face(int i) const { return {lo.x + i / height(), lo.y + i % height()}; }
  bool inside(Coord f) const { return f.x >= lo.x && f.x <= hi.x && f.y >= lo.y && f.y <= hi.y; }
};

FaceWindow window_for(const DomainGraph& g, Coord u, Coord v) {
  FaceWindow w{g.min_corner() - Coord{1, 1}, g.max_corner()};
  for (Coord f : {u, v}) {
    w.lo = {std::min(w.lo.x, f.x - 1), std::min(w.lo.y, f.y - 1)};
    w.hi = {std::max(w.hi.x, f.x + 1), std::max(w.hi.y, f.y + 1)};
  }
  return w;
}

// Edge shared by face f and its neighbour in direction d (E, N, W, S).
std::pair<Coord, Coord> shared_edge(Coord f, int d) {
  switch (d) {
    case 0: return {{f.x + 1, f.y}, {f.x + 1, f.y + 1}};
    case 1: return {{f.x, f.y + 1}, {f.x + 1, f.y + 1}};
    case 2: return {{f.x, f.y}, {f.x, f.y + 1}};
    default: return {{f.x, f.y}, {f.x + 1, f.y}};
  }
}

constexpr std::array<Coord, 4> kFaceSteps{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

}  // namespace

std::vector<int> dual_path(const DomainGraph& g, Coord u, Coord v) {
  const FaceWindow w = window_for(g, u, v);
  std::vector<int> prev(static_cast<std::size_t>(w.width() * w.height()), -2);
  std::vector<int> via(prev.size(), -1);
  std::deque<Coord> q{u};
  prev[static_cast<std::size_t>(w.id(u))] = -1;
  while (!q.empty()) {
    const Coord f = q.front();
    q.pop_front();
    if (f == v) break;
    for (int d = 0; d < 4; ++d) {
      const Coord n = f + kFaceSteps[static_cast<std::size_t>(d)];
      if (!w.inside(n) || prev[static_cast<std::size_t>(w.id(n))] != -2) continue;
      prev[static_cast<std::size_t>(w.id(n))] = w.id(f);
      const auto [a, b] = shared_edge(f, d);
      via[static_cast<std::size_t>(w.id(n))] = g.edge_between(a, b);
      q.push_back(n);
    }
  }
  std::vector<int> crossed;
  for (int i = w.id(v); prev[static_cast<std::size_t>(i)] >= 0; i = prev[static_cast<std::size_t>(i)]) {
    if (via[static_cast<std::size_t>(i)] >= 0) crossed.push_back(via[static_cast<std::size_t>(i)]);
  }
  std::reverse(crossed.begin(), crossed.end());
  return crossed;
}

bool separates(const DomainGraph& g, Mask positive, Coord u, Coord v) {
  const FaceWindow w = window_for(g, u, v);
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(w.width() * w.height()), 0);
  std::deque<Coord> q{u};
  seen[static_cast<std::size_t>(w.id(u))] = 1;
  while (!q.empty()) {
    const Coord f = q.front();
    q.pop_front();
    if (f == v) return false;
    for (int d = 0; d < 4; ++d) {
      const Coord n = f + kFaceSteps[static_cast<std::size_t>(d)];
      if (!w.inside(n) || seen[static_cast<std::size_t>(w.id(n))]) continue;
      const auto [a, b] = shared_edge(f, d);
      const int e = g.edge_between(a, b);
      if (e >= 0 && ((positive >> e) & 1)) continue;
      seen[static_cast<std::size_t>(w.id(n))] = 1;
      q.push_back(n);
    }
  }
  return true;
}

FluxHalfResult verify_flux_half(const DomainGraph& g, Coord u, Coord v, int cap) {
  if (u == v) throw Error("flux faces must differ");
  check_cap(g.num_edges(), cap);
  const ClassGraph cg(g);
  const Mask gm = all_edges(g.num_edges());
  const auto configs = parity_configs_masked(cg, gm, {});
  Mask path = 0;
  for (int e : dual_path(g, u, v)) path ^= bit(e);

  const double beta = critical::beta_c();
  const double t = std::tanh(beta);
  const double z = 1.0 / std::cosh(beta);
  struct Acc {
    double total = 0.0;
    double odd = 0.0;
  };
  std::map<std::pair<Mask, Mask>, Acc> by_aggregate;
  for (Mask e1 : configs) {
    for (Mask e2 : configs) {
      const Mask forced = e1 | e2;
      const Mask free = gm & ~forced;
      const int nfree = std::popcount(free);
      const double base = std::pow(t, std::popcount(e1 ^ e2)) * std::pow(t * t, std::popcount(e1 & e2));
      const bool odd = std::popcount(e1 & path) % 2 == 1;
      Mask s = 0;
      do {
        const int k = std::popcount(s);
        const double w = base * std::pow(1.0 - z * z, k) * std::pow(z * z, nfree - k);
        auto& acc = by_aggregate[{forced | s, e1 ^ e2}];
        acc.total += w;
        if (odd) acc.odd += w;
        s = (s - free) & free;
      } while (s != 0);
    }
  }
  FluxHalfResult res;
  for (const auto& [key, acc] : by_aggregate) {
    ++res.aggregates;
    if (!separates(g, key.first, u, v)) continue;
    ++res.qualifying;
    res.residual = std::max(res.residual, std::abs(acc.odd / acc.total - 0.5));
  }
  return res;
}

double ParityReductionResult::residual() const {
  return std::max({cosh_residual, sinh_residual, std::abs(q_even_series - q_even_closed)});
}

ParityReductionResult validate_parity_reduction(double beta, int e_cap) {
  if (e_cap < 12) throw Error("truncation order must be at least 12");
  double even = 0.0;
  double odd = 0.0;
  double term = 1.0;  // beta^n / n!
  for (int n = 0; n <= e_cap; ++n) {
    (n % 2 == 0 ? even : odd) += term;
    term *= beta / (n + 1);
  }
  ParityReductionResult r;
  r.cosh_residual = std::abs(even - std::cosh(beta));
  r.sinh_residual = std::abs(odd - std::sinh(beta));
  r.q_even_series = 1.0 - 1.0 / even;
  r.q_even_closed = critical::q_even(beta);
  return r;
}

}  // namespace currentlab::exact
