#include <doctest.h>

#include <random>

#include "currentlab/clusters.hpp"
#include "currentlab/sampler.hpp"

using namespace currentlab;
using namespace currentlab::clusters;
using lattice::DomainGraph;

namespace {

using Bits8 = std::vector<std::uint8_t>;

Bits8 none(const DomainGraph& g) { return Bits8(static_cast<std::size_t>(g.num_edges()), 0); }

// Marks the straight segment a -> b (horizontal or vertical).
void segment(const DomainGraph& g, Bits8& bits, Coord a, Coord b) {
  const Coord step{(b.x > a.x) - (b.x < a.x), (b.y > a.y) - (b.y < a.y)};
  for (Coord c = a; !(c == b); c = c + step) {
    const int e = g.edge_between(c, c + step);
    REQUIRE(e >= 0);
    bits[static_cast<std::size_t>(e)] = 1;
  }
}

sampler::DoubleTrace trace(Bits8 positive, Bits8 parity) {
  return {positive, parity, Bits8(parity.size(), 0)};
}

// Cluster count by depth-first search, independent of the union-find code.
int dfs_clusters(const DomainGraph& g, const Bits8& positive) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.num_vertices()));
  for (int e = 0; e < g.num_edges(); ++e) {
    if (!positive[static_cast<std::size_t>(e)]) continue;
    adj[static_cast<std::size_t>(g.edge(e).u)].push_back(g.edge(e).v);
    adj[static_cast<std::size_t>(g.edge(e).v)].push_back(g.edge(e).u);
  }
  std::vector<char> seen(adj.size(), 0);
  int count = 0;
  for (std::size_t s = 0; s < adj.size(); ++s) {
    if (seen[s]) continue;
    ++count;
    std::vector<int> stack{static_cast<int>(s)};
    seen[s] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adj[static_cast<std::size_t>(v)]) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  return count;
}

Bits8 random_bits(const DomainGraph& g, double p, std::mt19937_64& eng) {
  std::bernoulli_distribution b(p);
  Bits8 out(static_cast<std::size_t>(g.num_edges()));
  for (auto& x : out) x = b(eng);
  return out;
}

}  // namespace

TEST_CASE("cluster labels match a depth-first search") {
  const auto g = lattice::build_box(5);
  std::mt19937_64 eng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const auto bits = random_bits(g, 0.45, eng);
    const auto lab = label_clusters(g, bits, g);
    CHECK(lab.num_clusters == dfs_clusters(g, bits));
  }
  const auto outside = lattice::build_box(6);
  CHECK_THROWS_WITH(label_clusters(g, none(g), outside), doctest::Contains("region exceeds domain"));
}

TEST_CASE("annulus crossings of a line through the centre") {
  const auto g = lattice::build_box(4);
  auto bits = none(g);
  segment(g, bits, {-4, 0}, {4, 0});
  const auto dc = trace(bits, none(g));
  const auto rep = count_annulus_crossings(g, dc, {{0, 0}, 1, 4});
  CHECK(rep.k_clusters == 2);
  CHECK(rep.k_holes == 2);
  CHECK(count_annulus_crossings(g, trace(none(g), none(g)), {{0, 0}, 1, 4}).k_holes == 1);
}

TEST_CASE("A4 box event needs two clusters reaching the inner box") {
  const auto g = lattice::build_box(6);
  auto one = none(g);
  segment(g, one, {-4, 0}, {4, 0});
  segment(g, one, {4, 0}, {4, 4});
  CHECK_FALSE(detect_a4_square(g, trace(one, none(g)), {0, 0}, 1, 4));

  auto two = none(g);
  segment(g, two, {-4, 1}, {4, 1});
  segment(g, two, {-4, -1}, {4, -1});
  CHECK(detect_a4_square(g, trace(two, none(g)), {0, 0}, 1, 4));
  CHECK_FALSE(detect_a4_square(g, trace(two, none(g)), {0, 0}, 0, 4));
  BoxArms arms(g, {0, 0}, 4);
  const auto depths = arms.crossing_depths(two);
  REQUIRE(depths.size() > 2);
  CHECK(depths[0] == 1);
  CHECK(depths[1] == 1);
  CHECK(depths[2] == 4);  // isolated vertices of the outer square
}

TEST_CASE("hole events on a cross") {
  const auto g = lattice::build_box(6);
  auto pos = none(g);
  segment(g, pos, {-4, 0}, {4, 0});
  segment(g, pos, {0, -4}, {0, 4});
  HoleProbe probe(g, {0, 0}, 1, 4);
  CHECK(probe.label(pos).crossing.size() == 4);

  // Even parity on the cross: even aggregate flux and even n1-flux.
  auto rep = probe.analyse(trace(pos, none(g)));
  CHECK(rep.crossing_holes == 4);
  CHECK(rep.a4);
  CHECK(rep.any_even);
  CHECK_FALSE(rep.any_odd);
  CHECK(rep.distance == 1);

  // n1 odd along the arms, n2 odd as well: aggregate even, n1 odd.
  sampler::DoubleTrace dc{pos, none(g), pos};
  rep = probe.analyse(dc);
  CHECK(rep.a4);
  CHECK(rep.any_odd);
  CHECK(rep.n1_flux == 1);
  CHECK(detect_a4_blacksquare(g, dc, {0, 0}, 1, 4) == A4Hole::Odd);

  // Odd aggregate on the cross: neighbouring holes fail the gate, opposite
  // holes cross two arms and pass it.
  sampler::DoubleTrace odd_cross{pos, pos, pos};
  rep = probe.analyse(odd_cross);
  CHECK(rep.a4);
  CHECK(rep.any_even);
  CHECK_FALSE(rep.any_odd);

  // A single odd line splits the annulus into two holes with odd aggregate flux.
  auto line = none(g);
  segment(g, line, {-6, 0}, {6, 0});
  sampler::DoubleTrace odd{line, line, line};
  CHECK(probe.analyse(odd).crossing_holes == 2);
  CHECK_FALSE(probe.analyse(odd).a4);
  CHECK(detect_a4_blacksquare(g, odd, {0, 0}, 1, 4) == A4Hole::None);
}

TEST_CASE("hole fluxes of sourceless currents do not depend on the dual path") {
  const auto g = lattice::build_box(12);
  sampler::CurrentChain c1(g, {}, 1), c2(g, {}, 2);
  for (int R : {6, 10}) {
    HoleProbe probe(g, {0, 0}, 2, R);
    int compared = 0;
    for (int s = 0; s < 40; ++s) {
      c1.advance(2);
      c2.advance(2);
      const auto dc = sampler::double_current(c1.sample(), c2.sample());
      REQUIRE_FALSE(has_sources(g, dc.parity));
      const auto holes = probe.label(dc.positive);
      for (std::size_t i = 0; i < holes.crossing.size(); ++i) {
        for (std::size_t j = i + 1; j < holes.crossing.size(); ++j) {
          const auto p = probe.shortest_path(holes, holes.crossing[i], holes.crossing[j]);
          const auto q = probe.alternate_path(holes, holes.crossing[i], holes.crossing[j]);
          int fp = 0, fq = 0, f1p = 0, f1q = 0;
          for (int e : p) {
            fp ^= dc.parity[static_cast<std::size_t>(e)];
            f1p ^= dc.parity1[static_cast<std::size_t>(e)];
          }
          for (int e : q) {
            fq ^= dc.parity[static_cast<std::size_t>(e)];
            f1q ^= dc.parity1[static_cast<std::size_t>(e)];
          }
          CHECK(p.size() == q.size());
          CHECK(fp == fq);
          CHECK(f1p == f1q);
          ++compared;
        }
      }
    }
    CHECK(compared > 0);
  }
}

TEST_CASE("increasing events are monotone in the positive edges") {
  const auto g = lattice::build_box(8);
  std::mt19937_64 eng(4);
  BoundaryProbe probe(g, 3, 1);
  RectangleCrossings rect(g, {-4, -2}, 8, 4);
  for (int rep = 0; rep < 30; ++rep) {
    auto a = random_bits(g, 0.4, eng);
    auto b = a;
    const auto extra = random_bits(g, 0.2, eng);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] |= extra[i];
    CHECK(probe.connected(a) <= probe.connected(b));
    CHECK((rect.count(a) > 0) <= (rect.count(b) > 0));
    CHECK(dfs_clusters(g, a) >= dfs_clusters(g, b));
  }
  CHECK_FALSE(probe.connected(none(g)));
  CHECK(probe.connected(Bits8(static_cast<std::size_t>(g.num_edges()), 1)));
}

TEST_CASE("rectangle crossings count distinct left-right clusters") {
  const auto g = lattice::build_box(8);
  auto bits = none(g);
  segment(g, bits, {-4, -2}, {4, -2});
  segment(g, bits, {-4, 0}, {4, 0});
  segment(g, bits, {-4, 2}, {4, 2});
  CHECK(count_rectangle_crossings(g, bits, {-4, -2}, 8, 4) == 3);
  segment(g, bits, {0, -2}, {0, 0});
  CHECK(count_rectangle_crossings(g, bits, {-4, -2}, 8, 4) == 2);
}

TEST_CASE("B2k counts odd-part clusters crossing the annulus") {
  const auto g = lattice::build_box(5);
  auto eta = none(g);
  segment(g, eta, {-5, 2}, {5, 2});
  CHECK(count_b2k_odd(g, eta, {{0, 0}, 1, 5}) == 0);
  segment(g, eta, {-5, 1}, {5, 1});
  CHECK(count_b2k_odd(g, eta, {{0, 0}, 1, 5}) == 1);
  segment(g, eta, {-5, -1}, {5, -1});
  CHECK(count_b2k_odd(g, eta, {{0, 0}, 1, 5}) == 2);
}

TEST_CASE("separation event") {
  const auto g = lattice::build_box(20);
  const auto empty = detect_sep(g, none(g), 12, 0.2);
  CHECK(empty.holds);
  CHECK_FALSE(empty.vacuous);
  CHECK(empty.inner == 2);
  CHECK(empty.outer == 3);
  CHECK(detect_sep(g, none(g), 8, 0.5).vacuous);

  // Two parallel arms right next to the point (12, 0).
  auto bits = none(g);
  segment(g, bits, {9, 1}, {15, 1});
  segment(g, bits, {9, -1}, {15, -1});
  CHECK_FALSE(detect_sep(g, bits, 12, 0.1).holds);
}

TEST_CASE("boundary boxes") {
  const auto g = lattice::build_box(12);
  BoundaryBoxes boxes(g, 3, 2);
  CHECK(boxes.centres().size() > 0);
  for (Coord c : boxes.centres()) CHECK(linf_norm(c) + 6 > 12);
  CHECK(boxes.evaluate(none(g)).n == 0);
  const auto all = boxes.evaluate(Bits8(static_cast<std::size_t>(g.num_edges()), 1));
  CHECK(all.n == all.boxes);
}

TEST_CASE("whole-domain dual components") {
  const auto g = lattice::build_box(4);
  DualComponents comp(g);
  comp.label(none(g));
  CHECK(comp.same({0, 0}, {-5, -4}));
  auto loop = none(g);
  segment(g, loop, {-1, -1}, {1, -1});
  segment(g, loop, {1, -1}, {1, 1});
  segment(g, loop, {1, 1}, {-1, 1});
  segment(g, loop, {-1, 1}, {-1, -1});
  comp.label(loop);
  CHECK(comp.same({0, 0}, {-1, -1}));
  CHECK_FALSE(comp.same({0, 0}, {2, 2}));
  CHECK(comp.same({2, 2}, {3, -5}));
}

TEST_CASE("has_sources") {
  const auto g = lattice::build_box(2);
  auto eta = none(g);
  CHECK_FALSE(has_sources(g, eta));
  segment(g, eta, {-1, 0}, {1, 0});
  CHECK(has_sources(g, eta));
}
