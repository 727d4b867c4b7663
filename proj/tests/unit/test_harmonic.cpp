#include <doctest.h>

#include <cmath>
#include <limits>

#include "currentlab/harmonic.hpp"
#include "oracles.hpp"

using namespace currentlab;
using namespace currentlab::harmonic;
using lattice::DomainGraph;

namespace {
const double kC = 2.0 * (std::sqrt(2.0) - 1.0);
}

TEST_CASE("conductance sums m_x") {
  const auto rect = build_network(lattice::make_rect_quad({0, 0}, 5, 5));
  CHECK(rect.m({2, 2}) == doctest::Approx(4.0));
  CHECK(rect.m({2, 0}) == doctest::Approx(3.0 + kC));  // (bc): one exit
  CHECK(rect.m({0, 2}) == doctest::Approx(3.0));       // (ab): no exit
  CHECK(rect.m({2, 0}) == doctest::Approx(3.828427).epsilon(1e-6));
  const auto free = build_network(lattice::make_free_quad(lattice::build_box(2)));
  CHECK(free.m({-2, -2}) == doctest::Approx(2.0 + 2.0 * kC));
  CHECK(free.m({-2, 0}) == doctest::Approx(3.0 + kC));
  const auto single = build_network(lattice::make_free_quad(DomainGraph::from_parts({{0, 0}}, {})));
  CHECK(single.m({0, 0}) == doctest::Approx(3.313708).epsilon(1e-6));
}

TEST_CASE("one-vertex quad: Z = 1 / (4c)") {
  const auto g = DomainGraph::from_parts({{0, 0}}, {});
  const auto net = build_network(lattice::make_free_quad(g));
  CHECK(z_kernel(net, {0, 0}, {0, 0}) == doctest::Approx(0.301777).epsilon(1e-6));
}

TEST_CASE("two-face dual network: Z = m / (m^2 - 1) with m = 1 + 3c") {
  const auto g = DomainGraph::from_parts({{0, 0}, {1, 0}}, {{{0, 0}, {1, 0}}});
  const auto dual = dual_network(lattice::make_free_quad(g));
  REQUIRE(dual.size() == 2);
  const double m = 1.0 + 3.0 * kC;
  CHECK(z_kernel(dual, {0, 0}, {0, 0}) == doctest::Approx(m / (m * m - 1.0)).epsilon(1e-10));
  CHECK(z_kernel(dual, {0, 0}, {0, -1}) == doctest::Approx(1.0 / (m * m - 1.0)).epsilon(1e-10));
}

TEST_CASE("sparse solve matches the path-sum oracle") {
  for (const auto& q : {lattice::make_rect_quad({0, 0}, 3, 4), lattice::make_rect_quad({1, -1}, 5, 2),
                        lattice::make_free_quad(lattice::build_box(1))}) {
    const auto net = build_network(q);
    const auto walk = oracle::quad_walk(q);
    for (int x = 0; x < net.size(); ++x) {
      // Node order of the network is sorted; vertex order of the domain too.
      REQUIRE(net.nodes[static_cast<std::size_t>(x)] == q.domain.vertex(x));
      const auto ref = oracle::path_sum(walk, x);
      for (int y = 0; y < net.size(); ++y) {
        CHECK(z_kernel(net, net.nodes[static_cast<std::size_t>(x)], net.nodes[static_cast<std::size_t>(y)]) ==
              doctest::Approx(ref[static_cast<std::size_t>(y)]).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("Z is symmetric and the walk is reversible") {
  const auto q = lattice::make_rect_quad({0, 0}, 6, 4);
  const auto net = build_network(q);
  const Coord pts[] = {{0, 0}, {3, 1}, {5, 3}, {2, 3}};
  for (Coord x : pts) {
    for (Coord y : pts) {
      CHECK(z_kernel(net, x, y) == doctest::Approx(z_kernel(net, y, x)).epsilon(1e-10));
      CHECK(net.m(x) * green(net, x, y) == doctest::Approx(net.m(y) * green(net, y, x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("z_sets adds over both sets and decays with separation") {
  const auto q = lattice::make_rect_quad({0, 0}, 12, 4);
  const auto net = build_network(q);
  const std::vector<Coord> xs{{1, 1}, {1, 2}};
  const std::vector<Coord> ys{{5, 1}, {6, 2}};
  double direct = 0.0;
  for (Coord x : xs) {
    for (Coord y : ys) direct += z_kernel(net, x, y);
  }
  CHECK(z_sets(net, xs, ys) == doctest::Approx(direct).epsilon(1e-10));
  CHECK(z_sets(net, {}, ys) == 0.0);
  double last = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= 9; ++d) {
    const double z = z_kernel(net, {1, 1}, {1 + d, 1});
    CHECK(z < last);
    last = z;
  }
}

TEST_CASE("networks without a killed node are rejected") {
  ConductanceNetwork net;
  net.nodes = {{0, 0}, {1, 0}};
  net.links = {{0, 1}};
  net.exit = {0.0, 0.0};
  net.total = {1.0, 1.0};
  CHECK_FALSE(net.killed());
  CHECK_THROWS_WITH(z_kernel(net, {0, 0}, {1, 0}), doctest::Contains("walk not killed"));
}

TEST_CASE("dual vertex choice changes Z by little") {
  const auto q = lattice::make_free_quad(lattice::build_box(24));
  const auto dual = dual_network(q);
  const Coord x{12, 0};
  const Coord offs[] = {{0, 0}, {-1, 0}, {0, -1}, {-1, -1}};
  double lo = 1e300, hi = 0.0;
  for (Coord o : offs) {
    const double z = z_kernel(dual, x + o, o);
    lo = std::min(lo, z);
    hi = std::max(hi, z);
  }
  CHECK((hi - lo) / lo < 0.1);
}

TEST_CASE("effective resistance between (ab) and (cd)") {
  CHECK(extremal_distance_estimate(lattice::make_rect_quad({0, 0}, 3, 2)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(extremal_distance_estimate(lattice::make_rect_quad({0, 0}, 5, 2)) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(extremal_distance_estimate(lattice::make_rect_quad({0, 0}, 9, 4)) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::isinf(extremal_distance_estimate(lattice::make_free_quad(lattice::build_box(2)))));
}
