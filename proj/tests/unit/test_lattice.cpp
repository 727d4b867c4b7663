#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "currentlab/lattice.hpp"

using namespace currentlab;
using namespace currentlab::lattice;

namespace {

// Boundary recomputed from scratch: vertices missing one of their four Z^2 edges.
std::set<Coord> boundary_by_rule(const DomainGraph& g) {
  std::set<Coord> out;
  for (const Coord& c : g.vertices()) {
    for (Coord d : {Coord{1, 0}, Coord{-1, 0}, Coord{0, 1}, Coord{0, -1}}) {
      if (g.edge_between(c, c + d) < 0) out.insert(c);
    }
  }
  return out;
}

std::set<Coord> coords(const DomainGraph& g, std::span<const int> ids) {
  std::set<Coord> out;
  for (int v : ids) out.insert(g.vertex(v));
  return out;
}

}  // namespace

TEST_CASE("box counts") {
  const DomainGraph b0 = build_box(0);
  CHECK(b0.num_vertices() == 1);
  CHECK(b0.num_edges() == 0);
  CHECK(coords(b0, b0.boundary()) == std::set<Coord>{{0, 0}});

  CHECK(build_box(1).num_vertices() == 9);
  CHECK(build_box(1).num_edges() == 12);
  CHECK(build_box(2).num_vertices() == 25);
  CHECK(build_box(2).num_edges() == 40);

  for (int n = 0; n <= 64; n += (n < 8 ? 1 : 7)) {
    const DomainGraph g = build_box(n);
    CHECK(g.num_vertices() == (2 * n + 1) * (2 * n + 1));
    CHECK(g.num_edges() == 2 * (2 * n + 1) * 2 * n);
  }
  CHECK_THROWS_AS(build_box(-1), Error);
}

TEST_CASE("annulus sizes") {
  const DomainGraph a11 = build_annulus({0, 0}, 1, 1);
  CHECK(a11.num_vertices() == 8);
  CHECK_FALSE(a11.contains({0, 0}));
  CHECK(build_annulus({0, 0}, 1, 2).num_vertices() == 24);
  CHECK(build_annulus({0, 0}, 2, 2).num_vertices() == 16);
  CHECK(build_annulus({5, -3}, 2, 4).contains({9, -3}));
  CHECK_THROWS_AS(build_annulus({0, 0}, 3, 2), Error);
}

TEST_CASE("boundary matches the edge-absence rule") {
  std::vector<DomainGraph> gs{build_box(0), build_box(3), build_rect({2, -1}, 4, 2),
                              build_annulus({0, 0}, 1, 3), build_annulus({1, 1}, 2, 5)};
  for (const auto& g : gs) {
    CHECK(coords(g, g.boundary()) == boundary_by_rule(g));
  }
}

TEST_CASE("dual graph") {
  const DomainGraph edge = DomainGraph::from_parts({{0, 0}, {1, 0}}, {{{0, 0}, {1, 0}}});
  const DualGraph d = dual_of(edge);
  REQUIRE(d.dual_edges.size() == 1);
  const auto [below, above] = d.dual_edges[0];
  CHECK(DualGraph::center(d.faces[static_cast<std::size_t>(below)]) == std::pair{0.5, -0.5});
  CHECK(DualGraph::center(d.faces[static_cast<std::size_t>(above)]) == std::pair{0.5, 0.5});

  const DomainGraph box = build_box(1);
  const DualGraph db = dual_of(box);
  CHECK(db.dual_edges.size() == 12);
  CHECK(db.num_interior() == 4);
  // e -> e* is injective and e* crosses e at its midpoint.
  std::set<std::pair<int, int>> seen;
  for (int e = 0; e < box.num_edges(); ++e) {
    auto [f, h] = db.dual_edges[static_cast<std::size_t>(e)];
    CHECK(seen.insert({std::min(f, h), std::max(f, h)}).second);
    const auto cf = DualGraph::center(db.faces[static_cast<std::size_t>(f)]);
    const auto ch = DualGraph::center(db.faces[static_cast<std::size_t>(h)]);
    const Coord a = box.vertex(box.edge(e).u);
    const Coord b = box.vertex(box.edge(e).v);
    CHECK((cf.first + ch.first) / 2 == doctest::Approx((a.x + b.x) / 2.0));
    CHECK((cf.second + ch.second) / 2 == doctest::Approx((a.y + b.y) / 2.0));
  }

  // Ann(1,2): the four faces around the removed origin are not interior.
  const DomainGraph ann = build_annulus({0, 0}, 1, 2);
  const DualGraph da = dual_of(ann);
  for (Coord f : {Coord{-1, -1}, Coord{0, -1}, Coord{-1, 0}, Coord{0, 0}}) {
    const int i = da.index_of(f);
    REQUIRE(i >= 0);
    CHECK_FALSE(da.interior[static_cast<std::size_t>(i)]);
  }
  CHECK(da.num_interior() == 12);
  CHECK(euler_characteristic(ann) == 0);
  CHECK(euler_characteristic(build_box(4)) == 1);
}

TEST_CASE("boundary neighbourhood") {
  const DomainGraph g = build_box(3);
  CHECK(coords(g, boundary_neighborhood(g, 0)) == coords(g, g.boundary()));
  std::set<Coord> expect;
  for (const Coord& c : g.vertices()) {
    if (linf_norm(c) > 1) expect.insert(c);
  }
  CHECK(coords(g, boundary_neighborhood(g, 1)) == expect);
  CHECK(static_cast<int>(boundary_neighborhood(g, 10).size()) == g.num_vertices());
}

TEST_CASE("merging") {
  const DomainGraph g = build_box(2);
  const DomainGraph same = merge_vertices(g, {});
  CHECK(same.num_classes() == g.num_classes());
  CHECK_FALSE(same.has_merges());

  std::vector<Coord> inner;
  for (const Coord& c : g.vertices()) {
    if (linf_norm(c) <= 1) inner.push_back(c);
  }
  const DomainGraph m = merge_vertices(g, {inner}, {"L1"});
  CHECK(m.num_classes() == 25 - 9 + 1);
  const int c = m.class_by_name("L1");
  REQUIRE(c >= 0);
  CHECK(m.class_members(c).size() == 9);

  // Idempotent.
  const DomainGraph mm = merge_vertices(m, {inner}, {"L1"});
  CHECK(mm.num_classes() == m.num_classes());
  for (int v = 0; v < g.num_vertices(); ++v) CHECK(mm.class_of(v) == m.class_of(v));

  // Disjoint class lists commute.
  const std::vector<Coord> left{{-2, -2}, {-2, -1}, {-2, 0}};
  const std::vector<Coord> right{{2, 0}, {2, 1}, {2, 2}};
  const DomainGraph ab = merge_vertices(merge_vertices(g, {left}), {right});
  const DomainGraph ba = merge_vertices(merge_vertices(g, {right}), {left});
  CHECK(ab.num_classes() == ba.num_classes());
  for (int u = 0; u < g.num_vertices(); ++u) {
    for (int v = 0; v < g.num_vertices(); ++v) {
      CHECK((ab.class_of(u) == ab.class_of(v)) == (ba.class_of(u) == ba.class_of(v)));
    }
  }

  CHECK_THROWS_AS(merge_vertices(g, {{{0, 0}, {0, 1}}, {{0, 1}, {1, 1}}}), Error);
  CHECK_THROWS_AS(merge_vertices(g, {{{7, 7}}}), Error);
}

TEST_CASE("boundary walk") {
  const DomainGraph box = build_box(1);
  const auto walk = boundary_walk(box);
  CHECK(walk.size() == 8);
  CHECK(box.vertex(walk.front().from) == Coord{-1, 0});
  CHECK(box.vertex(walk.front().to) == Coord{-1, -1});
  for (const auto& s : walk) {
    const DualGraph d = dual_of(box);
    CHECK_FALSE(d.interior[static_cast<std::size_t>(d.index_of(s.right_face))]);
  }
  // A path is walked out and back.
  const DomainGraph path = DomainGraph::from_parts({{0, 0}, {1, 0}, {2, 0}}, {{{0, 0}, {1, 0}}, {{1, 0}, {2, 0}}});
  CHECK(boundary_walk(path).size() == 4);
}

TEST_CASE("quads") {
  const Quad q = make_rect_quad({0, 0}, 4, 3);
  CHECK(q.arc(Arc::AB).size() == 3);
  CHECK(q.arc(Arc::CD).size() == 3);
  CHECK(q.arc(Arc::BC).size() == 2);
  CHECK(q.arc(Arc::DA).size() == 2);
  CHECK(q.domain.vertex(q.arc(Arc::AB).front()) == Coord{0, 2});
  const Quad f = make_free_quad(build_box(2));
  CHECK(f.arc(Arc::BC).size() == 16);
  Quad bad = q;
  bad.arcs[0].push_back(bad.arcs[1].front());
  CHECK_THROWS_AS(validate_quad(bad), Error);
}

TEST_CASE("domain text format round trip") {
  const DomainGraph g = merge_vertices(build_annulus({0, 0}, 1, 2), {{{2, 2}, {2, 1}}}, {"M"});
  std::stringstream ss;
  write_domain(ss, g);
  const DomainGraph back = read_domain(ss);
  CHECK(back.num_vertices() == g.num_vertices());
  CHECK(back.num_edges() == g.num_edges());
  CHECK(back.num_classes() == g.num_classes());
  CHECK(back.class_by_name("M") >= 0);
  CHECK(back.kind() == "annulus");

  CHECK(parse_domain_spec("box:3").num_vertices() == 49);
  CHECK(parse_domain_spec("rect:4x2@1,1").contains({4, 2}));
  CHECK(parse_domain_spec("annulus:1,2").num_vertices() == 24);
  CHECK_THROWS_AS(parse_domain_spec("blob:3"), Error);
  std::stringstream broken("domain box\nvertices 2\n0 0\n");
  CHECK_THROWS_AS(read_domain(broken), Error);
}
