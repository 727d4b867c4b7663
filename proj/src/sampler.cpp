#include "currentlab/sampler.hpp"

#include <algorithm>

#include "currentlab/critical.hpp"
#include "currentlab/union_find.hpp"

namespace currentlab::sampler {

namespace {

constexpr std::uint64_t kSprinkleStream = 0x5bd1e995u;

}  // namespace

FkChain::FkChain(const DomainGraph& g, std::uint64_t seed)
    : g_(&g), seed_(seed), eng_(seed), bond_(critical::p_c()) {
  ends_.reserve(static_cast<std::size_t>(g.num_edges()));
  for (const Edge& e : g.edges()) ends_.push_back({g.class_of(e.u), g.class_of(e.v)});
  spins_.spin.assign(static_cast<std::size_t>(g.num_classes()), 1);
  omega_.open.assign(static_cast<std::size_t>(g.num_edges()), 0);
}

void FkChain::advance(int sweeps) {
  for (int i = 0; i < sweeps; ++i) sweep();
}

void FkChain::sweep() {
  const int n = g_->num_classes();
  UnionFind uf(n);
  auto& s = spins_.spin;
  for (std::size_t e = 0; e < ends_.size(); ++e) {
    const auto [a, b] = ends_[e];
    const bool open = s[static_cast<std::size_t>(a)] == s[static_cast<std::size_t>(b)] && bond_(eng_);
    omega_.open[e] = open;
    if (open) uf.unite(a, b);
  }
  cluster_spin_.assign(static_cast<std::size_t>(n), 0);
  for (int c = 0; c < n; ++c) {
    auto& cs = cluster_spin_[static_cast<std::size_t>(uf.find(c))];
    if (cs == 0) cs = static_cast<std::int8_t>(random_sign(eng_));
    s[static_cast<std::size_t>(c)] = cs;
  }
  ++sweeps_;
}

std::vector<std::int8_t> boundary_face_spins(const DomainGraph& g, const lattice::DualGraph& dual,
                                             const exact::SourceSet& sources) {
  if (g.has_merges()) throw Error("current sampler does not support merged vertices");
  std::vector<std::uint8_t> is_source(static_cast<std::size_t>(g.num_vertices()), 0);
  for (int s : sources) {
    if (s < 0 || s >= g.num_vertices() || !g.is_boundary(s)) throw Error("unsupported source placement");
    is_source[static_cast<std::size_t>(s)] = 1;
  }
  std::vector<std::int8_t> spin(static_cast<std::size_t>(dual.num_faces()), 0);
  std::int8_t cur = 1;
  std::size_t flipped = 0;
  for (const auto& step : lattice::boundary_walk(g)) {
    auto& src = is_source[static_cast<std::size_t>(step.from)];
    if (src) {
      src = 0;
      cur = static_cast<std::int8_t>(-cur);
      ++flipped;
    }
    const int f = dual.index_of(step.right_face);
    auto& sf = spin[static_cast<std::size_t>(f)];
    if (sf != 0 && sf != cur) throw Error("unsupported source placement");
    sf = cur;
  }
  if (flipped != sources.size()) throw Error("unsupported source placement");
  for (int f = 0; f < dual.num_faces(); ++f) {
    if (!dual.interior[static_cast<std::size_t>(f)] && spin[static_cast<std::size_t>(f)] == 0) {
      throw Error("domain has an outer face off the boundary walk (holes are not supported)");
    }
  }
  return spin;
}

CurrentChain::CurrentChain(const DomainGraph& g, const exact::SourceSet& sources, std::uint64_t seed)
    : g_(&g),
      dual_(lattice::dual_of(g)),
      seed_(seed),
      eng_(seed),
      sprinkle_eng_(derive_seed(seed, kSprinkleStream)),
      bond_(critical::p_c()),
      even_(critical::q_even_c()) {
  if (sources.size() % 2 != 0) throw Error("source set has odd cardinality");
  if (!lattice::is_connected(g) || lattice::euler_characteristic(g) != 1) {
    throw Error("current sampler needs a connected domain without holes");
  }
  fixed_ = boundary_face_spins(g, dual_, sources);
  for (std::size_t f = 0; f < fixed_.size(); ++f) {
    if (dual_.interior[f]) fixed_[f] = 0;
  }
  for (const auto& de : dual_.dual_edges) {
    if (fixed_[static_cast<std::size_t>(de[0])] == 0 || fixed_[static_cast<std::size_t>(de[1])] == 0) {
      active_.push_back(de);
    }
  }
  spin_.resize(fixed_.size());
  for (std::size_t f = 0; f < fixed_.size(); ++f) spin_[f] = fixed_[f] != 0 ? fixed_[f] : std::int8_t{1};
}

void CurrentChain::advance(int sweeps) {
  for (int i = 0; i < sweeps; ++i) sweep();
}

void CurrentChain::sweep() {
  const int n = dual_.num_faces();
  UnionFind uf(n);
  for (const auto& [a, b] : active_) {
    if (spin_[static_cast<std::size_t>(a)] == spin_[static_cast<std::size_t>(b)] && bond_(eng_)) uf.unite(a, b);
  }
  cluster_spin_.assign(static_cast<std::size_t>(n), 0);
  for (int f = 0; f < n; ++f) {
    if (fixed_[static_cast<std::size_t>(f)] != 0) cluster_spin_[static_cast<std::size_t>(uf.find(f))] = fixed_[static_cast<std::size_t>(f)];
  }
  for (int f = 0; f < n; ++f) {
    if (fixed_[static_cast<std::size_t>(f)] != 0) continue;
    auto& cs = cluster_spin_[static_cast<std::size_t>(uf.find(f))];
    if (cs == 0) cs = static_cast<std::int8_t>(random_sign(eng_));
    spin_[static_cast<std::size_t>(f)] = cs;
  }
  ++sweeps_;
}

void CurrentChain::sample_into(CurrentTrace& out) {
  const std::size_t m = dual_.dual_edges.size();
  out.odd.resize(m);
  out.positive.resize(m);
  for (std::size_t e = 0; e < m; ++e) {
    const auto [a, b] = dual_.dual_edges[e];
    const bool odd = spin_[static_cast<std::size_t>(a)] != spin_[static_cast<std::size_t>(b)];
    out.odd[e] = odd;
    out.positive[e] = odd || even_(sprinkle_eng_);
  }
}

void CurrentChain::sample_edges(std::span<const int> edges, CurrentTrace& out) {
  const std::size_t m = dual_.dual_edges.size();
  out.odd.resize(m);
  out.positive.resize(m);
  for (int e : edges) {
    const auto [a, b] = dual_.dual_edges[static_cast<std::size_t>(e)];
    const bool odd = spin_[static_cast<std::size_t>(a)] != spin_[static_cast<std::size_t>(b)];
    out.odd[static_cast<std::size_t>(e)] = odd;
    out.positive[static_cast<std::size_t>(e)] = odd || even_(sprinkle_eng_);
  }
}

CurrentTrace CurrentChain::sample() {
  CurrentTrace t;
  sample_into(t);
  return t;
}

FkConfig sample_fk(const DomainGraph& g, int sweeps, std::uint64_t seed) {
  FkChain chain(g, seed);
  chain.advance(std::max(sweeps, 1));
  return chain.sample();
}

SpinConfig es_spins(const DomainGraph& g, const FkConfig& omega, std::uint64_t seed) {
  if (omega.open.size() != static_cast<std::size_t>(g.num_edges())) throw Error("configuration does not match the domain");
  const int n = g.num_classes();
  UnionFind uf(n);
  for (int e = 0; e < g.num_edges(); ++e) {
    if (omega.open[static_cast<std::size_t>(e)]) uf.unite(g.class_of(g.edge(e).u), g.class_of(g.edge(e).v));
  }
  Engine eng(seed);
  std::vector<std::int8_t> cs(static_cast<std::size_t>(n), 0);
  SpinConfig out;
  out.spin.resize(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    auto& s = cs[static_cast<std::size_t>(uf.find(c))];
    if (s == 0) s = static_cast<std::int8_t>(random_sign(eng));
    out.spin[static_cast<std::size_t>(c)] = s;
  }
  return out;
}

std::vector<std::uint8_t> kw_contours(const DomainGraph& g, const lattice::DualGraph& dual,
                                      const std::vector<std::int8_t>& face_spins) {
  if (face_spins.size() != static_cast<std::size_t>(dual.num_faces()) ||
      dual.dual_edges.size() != static_cast<std::size_t>(g.num_edges())) {
    throw Error("dual spins do not match the domain");
  }
  std::vector<std::uint8_t> eta(dual.dual_edges.size());
  for (std::size_t e = 0; e < eta.size(); ++e) {
    const auto [a, b] = dual.dual_edges[e];
    const auto sa = face_spins[static_cast<std::size_t>(a)];
    const auto sb = face_spins[static_cast<std::size_t>(b)];
    if (sa == 0 || sb == 0) throw Error("dual spin missing");
    eta[e] = sa != sb;
  }
  return eta;
}

CurrentTrace sprinkle_even(const std::vector<std::uint8_t>& eta, std::uint64_t seed) {
  Engine eng(seed);
  const Bernoulli even(critical::q_even_c());
  CurrentTrace t;
  t.odd = eta;
  t.positive.resize(eta.size());
  for (std::size_t e = 0; e < eta.size(); ++e) t.positive[e] = eta[e] || even(eng);
  return t;
}

CurrentTrace sample_current(const DomainGraph& g, const exact::SourceSet& sources, int sweeps, std::uint64_t seed) {
  CurrentChain chain(g, sources, seed);
  chain.advance(sweeps);
  return chain.sample();
}

DoubleTrace double_current(const CurrentTrace& t1, const CurrentTrace& t2) {
  if (t1.odd.size() != t2.odd.size()) throw Error("double current needs traces on the same domain");
  DoubleTrace d;
  const std::size_t m = t1.odd.size();
  d.positive.resize(m);
  d.parity.resize(m);
  d.parity1 = t1.odd;
  for (std::size_t e = 0; e < m; ++e) {
    d.positive[e] = t1.positive[e] | t2.positive[e];
    d.parity[e] = t1.odd[e] ^ t2.odd[e];
  }
  return d;
}

DoubleTrace double_current(const DomainGraph& g, const CurrentTrace& t1, const DomainGraph& h, const CurrentTrace& t2) {
  CurrentTrace lifted;
  lifted.odd.assign(t1.odd.size(), 0);
  lifted.positive.assign(t1.odd.size(), 0);
  for (int e = 0; e < h.num_edges(); ++e) {
    const int ge = g.edge_between(h.vertex(h.edge(e).u), h.vertex(h.edge(e).v));
    if (ge < 0) throw Error("second domain is not inside the first");
    lifted.odd[static_cast<std::size_t>(ge)] = t2.odd[static_cast<std::size_t>(e)];
    lifted.positive[static_cast<std::size_t>(ge)] = t2.positive[static_cast<std::size_t>(e)];
  }
  return double_current(t1, lifted);
}

FkConfig fk_from_current(const CurrentTrace& t, std::uint64_t seed) {
  Engine eng(seed);
  const Bernoulli extra(critical::sprinkle());
  FkConfig w;
  w.open.resize(t.positive.size());
  for (std::size_t e = 0; e < w.open.size(); ++e) w.open[e] = t.positive[e] || extra(eng);
  return w;
}

}  // namespace currentlab::sampler
