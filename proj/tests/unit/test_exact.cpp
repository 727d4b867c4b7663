#include <doctest.h>

#include <bit>
#include <cmath>
#include <functional>
#include <set>

#include "../support/oracles.hpp"
#include "currentlab/critical.hpp"
#include "currentlab/exact.hpp"

using namespace currentlab;
using namespace currentlab::exact;
using lattice::DomainGraph;

namespace {

const double kT = std::sqrt(2.0) - 1.0;

DomainGraph single_edge() { return DomainGraph::from_parts({{0, 0}, {1, 0}}, {{{0, 0}, {1, 0}}}); }
DomainGraph four_cycle() { return lattice::build_rect({0, 0}, 2, 2); }
DomainGraph grid23() { return lattice::build_rect({0, 0}, 3, 2); }

std::vector<SourceSet> even_subsets(int n, int max_size) {
  std::vector<SourceSet> out;
  for (int s = 0; s < (1 << n); ++s) {
    const int k = std::popcount(static_cast<unsigned>(s));
    if (k % 2 || k > max_size) continue;
    SourceSet set;
    for (int i = 0; i < n; ++i) {
      if ((s >> i) & 1) set.push_back(i);
    }
    out.push_back(set);
  }
  return out;
}

// Clusters of `positive` (edge ids of g) each containing an even number of A.
bool every_cluster_even(const DomainGraph& g, oracle::Mask positive, const SourceSet& a) {
  std::vector<int> parent(static_cast<std::size_t>(g.num_classes()));
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    return parent[static_cast<std::size_t>(x)] == x ? x : find(parent[static_cast<std::size_t>(x)]);
  };
  for (int e = 0; e < g.num_edges(); ++e) {
    if ((positive >> e) & 1) {
      parent[static_cast<std::size_t>(find(g.class_of(g.edge(e).u)))] = find(g.class_of(g.edge(e).v));
    }
  }
  std::vector<int> cnt(parent.size(), 0);
  for (int s : a) cnt[static_cast<std::size_t>(find(s))] ^= 1;
  for (int c : cnt) {
    if (c) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("enumerate_parity examples") {
  const auto g = single_edge();
  auto t0 = enumerate_parity(g, {});
  REQUIRE(t0.entries.size() == 1);
  CHECK(t0.entries[0].odd == 0);
  CHECK(t0.total == doctest::Approx(1.0));

  auto t1 = enumerate_parity(g, {0, 1});
  REQUIRE(t1.entries.size() == 1);
  CHECK(t1.entries[0].odd == 1);
  CHECK(t1.total == doctest::Approx(0.414214).epsilon(1e-6));

  const auto c4 = four_cycle();
  const auto src = sources_of(c4, std::vector<Coord>{{0, 0}, {1, 0}});
  auto t4 = enumerate_parity(c4, src);
  CHECK(t4.entries.size() == 2);
  CHECK(t4.total == doctest::Approx(kT + kT * kT * kT).epsilon(1e-12));
  CHECK(t4.total == doctest::Approx(0.485282).epsilon(1e-6));

  CHECK_THROWS_AS(enumerate_parity(c4, {0}), Error);
  CHECK_THROWS_AS(enumerate_parity(lattice::build_box(2), {}), Error);
}

TEST_CASE("correlation examples") {
  CHECK(correlation_exact(single_edge(), {0, 1}) == doctest::Approx(0.414214).epsilon(1e-6));
  const auto c4 = four_cycle();
  const auto src = sources_of(c4, std::vector<Coord>{{0, 0}, {1, 0}});
  CHECK(correlation_exact(c4, src) == doctest::Approx(0.471404).epsilon(1e-6));
  CHECK(correlation_exact(grid23(), {}) == 1.0);
}

TEST_CASE("parity enumeration agrees with spin sums on small graphs") {
  const DomainGraph g = grid23();
  const double beta = critical::beta_c();
  int checked = 0;
  for (const auto& ids : oracle::connected_edge_subsets(g)) {
    const DomainGraph sub = lattice::edge_subgraph(g, ids);
    for (const auto& b : even_subsets(sub.num_classes(), 6)) {
      const double a = correlation_exact(sub, b);
      CHECK(std::abs(a - correlation_spin_sum(sub, b, beta)) <= 1e-10);
      CHECK(a >= 0.0);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("merging an edge's endpoints never lowers correlations") {
  const DomainGraph g = grid23();
  const double beta = critical::beta_c();
  for (int e = 0; e < g.num_edges(); ++e) {
    const DomainGraph m = lattice::merge_vertices(g, {{g.vertex(g.edge(e).u), g.vertex(g.edge(e).v)}});
    for (int x = 0; x < g.num_vertices(); ++x) {
      for (int y = x + 1; y < g.num_vertices(); ++y) {
        const double before = correlation_exact(g, {x, y});
        const auto merged_src = sources_of(m, std::vector<Coord>{g.vertex(x), g.vertex(y)});
        const double after = correlation_exact(m, merged_src);
        CHECK(after >= before - 1e-12);
        CHECK(std::abs(after - correlation_spin_sum(m, merged_src, beta)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("trace distribution") {
  const double q = critical::q_even_c();
  CHECK(q == doctest::Approx(0.0898).epsilon(1e-3));
  const auto t0 = trace_distribution_exact(single_edge(), {});
  CHECK(t0.positive_marginal(0) == doctest::Approx(q).epsilon(1e-12));
  const auto t1 = trace_distribution_exact(single_edge(), {0, 1});
  CHECK(t1.positive_marginal(0) == doctest::Approx(1.0));

  // Against direct sums over integer currents with n_e <= 14.
  for (const DomainGraph& g : {four_cycle(), grid23()}) {
    const int nmax = g.num_edges() <= 4 ? 14 : 7;
    const double tol = g.num_edges() <= 4 ? 1e-10 : 1e-6;
    const auto direct = oracle::direct_traces(g, critical::beta_c(), nmax);
    for (const auto& b : even_subsets(g.num_classes(), 2)) {
      const auto table = trace_distribution_exact(g, b);
      double z = 0.0;
      for (const auto& [k, w] : direct) {
        if (k.sources == oracle::class_mask(b)) z += w;
      }
      REQUIRE(z > 0.0);
      CHECK(std::abs(z - enumerate_parity(g, b).total) <= tol);
      for (const auto& en : table.entries) {
        const auto it = direct.find({oracle::class_mask(b), en.odd, en.positive});
        REQUIRE(it != direct.end());
        CHECK(std::abs(it->second / z - en.weight) <= tol);
      }
    }
  }
  // All four edges of the sourceless 4-cycle positive.
  const auto c4 = trace_distribution_exact(four_cycle(), {});
  double all = 0.0;
  for (const auto& en : c4.entries) {
    if (en.positive == 0xF) all += en.weight;
  }
  const auto direct = oracle::direct_traces(four_cycle(), critical::beta_c(), 12);
  double dall = 0.0, dz = 0.0;
  for (const auto& [k, w] : direct) {
    if (k.sources) continue;
    dz += w;
    if (k.positive == 0xF) dall += w;
  }
  CHECK(std::abs(all - dall / dz) <= 1e-9);
}

TEST_CASE("switching lemma examples") {
  const auto c4 = four_cycle();
  auto r = verify_switching_lemma(c4, c4, {}, {}, functional_one());
  CHECK(r.residual <= 1e-10);
  CHECK(r.formal_equal);
  CHECK(r.lhs == doctest::Approx(r.rhs));

  const auto a = sources_of(c4, std::vector<Coord>{{0, 0}, {1, 0}});
  r = verify_switching_lemma(c4, c4, a, {}, functional_edge_positive(0));
  CHECK(r.residual <= 1e-10);
  CHECK(r.formal_checked);
  CHECK(r.formal_equal);
  REQUIRE(r.normalised);
  CHECK(std::abs(r.expectation_lhs - r.expectation_rhs) <= 1e-10);

  const auto g = grid23();
  const auto h = lattice::build_rect({0, 0}, 2, 2);
  const auto ha = sources_of(g, std::vector<Coord>{{0, 0}, {1, 1}});
  const auto gb = sources_of(g, std::vector<Coord>{{0, 1}, {2, 0}});
  r = verify_switching_lemma(g, h, ha, gb, functional_cluster_count(g));
  CHECK(r.residual <= 1e-10);
  CHECK(r.formal_equal);
  REQUIRE(r.normalised);
  CHECK(std::abs(r.expectation_lhs - r.expectation_rhs) <= 1e-10);

  SwitchingOptions bad;
  bad.corrupt = true;
  r = verify_switching_lemma(g, h, ha, gb, functional_cluster_count(g), bad);
  CHECK(r.residual > 1e-10);
  CHECK_FALSE(r.formal_equal);

  CHECK_THROWS_AS(verify_switching_lemma(g, h, sources_of(g, std::vector<Coord>{{0, 0}, {2, 1}}), {},
                                         functional_one()),
                  Error);
}

TEST_CASE("switching lemma against direct current sums") {
  const auto g = grid23();
  const auto h = lattice::build_rect({0, 0}, 2, 2);
  // h edge i -> g edge
  std::vector<int> to_g;
  for (const Edge& e : h.edges()) to_g.push_back(g.edge_between(h.vertex(e.u), h.vertex(e.v)));
  const auto dg = oracle::direct_traces(g, critical::beta_c(), 7);
  const auto dh = oracle::direct_traces(h, critical::beta_c(), 14);
  auto lift = [&](oracle::Mask hm) {
    oracle::Mask out = 0;
    for (std::size_t i = 0; i < to_g.size(); ++i) {
      if ((hm >> i) & 1) out |= oracle::Mask{1} << to_g[i];
    }
    return out;
  };
  auto h_class = [&](int g_class) { return h.class_of(h.index_of(g.vertex(g_class))); };

  const auto a = sources_of(g, std::vector<Coord>{{0, 0}, {1, 1}});
  const auto b = sources_of(g, std::vector<Coord>{{0, 1}, {2, 0}});
  SourceSet ab;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(ab));
  std::vector<int> a_in_h;
  for (int s : a) a_in_h.push_back(h_class(s));

  const auto f = functional_cluster_count(g);
  double lhs = 0.0, rhs = 0.0;
  for (const auto& [k1, w1] : dg) {
    const bool l1 = k1.sources == oracle::class_mask(b);
    const bool r1 = k1.sources == oracle::class_mask(ab);
    if (!l1 && !r1) continue;
    for (const auto& [k2, w2] : dh) {
      const oracle::Mask p = k1.positive | lift(k2.positive);
      if (l1 && k2.sources == oracle::class_mask(a_in_h)) lhs += w1 * w2 * static_cast<double>(f(p));
      if (r1 && k2.sources == 0 && every_cluster_even(h, [&] {
            oracle::Mask hp = 0;
            for (std::size_t i = 0; i < to_g.size(); ++i) {
              if ((p >> to_g[i]) & 1) hp |= oracle::Mask{1} << i;
            }
            return hp;
          }(), a_in_h)) {
        rhs += w1 * w2 * static_cast<double>(f(p));
      }
    }
  }
  const auto r = verify_switching_lemma(g, h, a, b, f);
  CHECK(std::abs(r.lhs - lhs) <= 1e-6 * lhs);
  CHECK(std::abs(r.rhs - rhs) <= 1e-6 * rhs);
  CHECK(std::abs(lhs - rhs) <= 1e-6 * lhs);
}

TEST_CASE("switching principle") {
  const auto any = [](std::uint32_t) { return 1.0; };
  const auto m0 = Multigraph::from_multiplicities(2, {{0, 1, 1}});
  auto r = verify_switching_principle(m0, {}, any);
  CHECK(r.k == 0);
  CHECK(r.residual == 0.0);

  const auto doubled = Multigraph::from_multiplicities(2, {{0, 1, 2}});
  r = verify_switching_principle(doubled, {0, 1}, any);
  CHECK(r.lhs == 2.0);
  CHECK(r.rhs == 2.0);

  const auto tri = Multigraph::from_multiplicities(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 2}});
  r = verify_switching_principle(tri, {0, 1}, [](std::uint32_t s) { return double(std::popcount(s) % 2); });
  CHECK(r.residual <= 1e-10);
  CHECK(r.k == 1);

  const auto split = Multigraph::from_multiplicities(4, {{0, 1, 2}, {2, 3, 1}});
  CHECK_THROWS_WITH_AS(verify_switching_principle(split, {0, 2}, any), "unswitchable", Error);
}

TEST_CASE("flux parity") {
  CHECK(flux_parity({}, 0b111) == 0);
  const std::vector<int> p{0, 1, 2};
  CHECK(flux_parity(p, 0b101) == 0);
  CHECK(flux_parity(p, 0b111) == 1);
  const std::vector<int> outside{-1};
  CHECK_THROWS_AS(flux_parity(outside, 1), Error);
}

TEST_CASE("flux parity is path independent for sourceless parities") {
  const DomainGraph g = grid23();
  const auto etas = parity_configs(g, {});
  // All simple face paths in the window [-1, 2] x [-1, 1] from u to v.
  const Coord lo{-1, -1}, hi{2, 1};
  const Coord u{0, 0}, v{2, -1};
  std::vector<std::vector<int>> paths;
  std::vector<int> crossed;
  std::set<Coord> on_path{u};
  std::function<void(Coord)> walk = [&](Coord f) {
    if (f == v) {
      paths.push_back(crossed);
      return;
    }
    const Coord steps[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int d = 0; d < 4; ++d) {
      const Coord n = f + steps[d];
      if (n.x < lo.x || n.y < lo.y || n.x > hi.x || n.y > hi.y || on_path.count(n)) continue;
      Coord a, b;
      if (d == 0) a = {f.x + 1, f.y}, b = {f.x + 1, f.y + 1};
      if (d == 1) a = {f.x, f.y + 1}, b = {f.x + 1, f.y + 1};
      if (d == 2) a = {f.x, f.y}, b = {f.x, f.y + 1};
      if (d == 3) a = {f.x, f.y}, b = {f.x + 1, f.y};
      const int e = g.edge_between(a, b);
      on_path.insert(n);
      if (e >= 0) crossed.push_back(e);
      walk(n);
      if (e >= 0) crossed.pop_back();
      on_path.erase(n);
    }
  };
  walk(u);
  CHECK(paths.size() > 20);
  for (auto eta : etas) {
    const int ref = flux_parity(dual_path(g, u, v), eta);
    for (const auto& p : paths) CHECK(flux_parity(p, eta) == ref);
  }
}

TEST_CASE("flux half") {
  const auto c4 = four_cycle();
  auto r = verify_flux_half(c4, {0, 0}, {3, 3});
  CHECK(r.qualifying > 0);
  CHECK(r.residual <= 1e-10);
  // Faces that no aggregate separates: every aggregate is skipped.
  r = verify_flux_half(c4, {-1, 0}, {3, 3});
  CHECK(r.qualifying == 0);
  CHECK(r.aggregates > 0);

  const auto box = lattice::build_box(1);
  r = verify_flux_half(box, {0, 0}, {5, 5});
  CHECK(r.qualifying > 0);
  CHECK(r.residual <= 1e-10);
  r = verify_flux_half(box, {-1, -1}, {0, 0});
  CHECK(r.qualifying > 0);
  CHECK(r.residual <= 1e-10);
}

TEST_CASE("parity reduction") {
  for (double beta : {0.0, critical::beta_c(), 1.0}) {
    const auto r = validate_parity_reduction(beta, 30);
    CHECK(r.residual() <= 1e-10);
  }
  const auto r0 = validate_parity_reduction(0.0, 12);
  CHECK(r0.q_even_series == 0.0);
  const auto rc = validate_parity_reduction(critical::beta_c(), 30);
  CHECK(rc.q_even_series == doctest::Approx(0.0898).epsilon(1e-3));
  CHECK(std::abs(rc.q_even_series - (1.0 - 1.0 / std::cosh(critical::beta_c()))) <= 1e-6);
  CHECK(std::cosh(1.0) == doctest::Approx(1.543081).epsilon(1e-6));
  CHECK_THROWS_AS(validate_parity_reduction(1.0, 5), Error);
}
