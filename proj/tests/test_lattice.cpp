#include <doctest.h>

#include "stitchlab/common.hpp"
#include "stitchlab/lattice.hpp"

#include <cmath>
#include <fstream>

using namespace stitchlab;

TEST_CASE("ball on a chain") {
  LatticeGraph g = LatticeGraph::chain(10);
  Region b = g.ball(4, 2);
  CHECK(b.sites() == std::vector<int>{2, 3, 4, 5, 6});
  CHECK(g.ball(4, 0).sites() == std::vector<int>{4});
  // monotone in r
  for (int r = 0; r < 9; ++r) CHECK(g.ball(4, r).subset_of(g.ball(4, r + 1)));
  CHECK_THROWS_WITH(g.ball(11, 1), "site not in graph");
}

TEST_CASE("ball on a grid corner") {
  LatticeGraph g = LatticeGraph::grid(4, 4);
  Region corner = g.ball(0, 1);
  CHECK(corner.size() == 3);
  CHECK(corner.contains(0));
  CHECK(corner.contains(1));
  CHECK(corner.contains(4));
}

TEST_CASE("fatten") {
  LatticeGraph g = LatticeGraph::chain(10);
  Region z({3, 4}, 10);
  CHECK(g.fatten(z, 2).sites() == std::vector<int>{1, 2, 3, 4, 5, 6});
  CHECK(g.fatten(z, 0) == z);
  CHECK(g.fatten(Region::all(10), 3) == Region::all(10));
  CHECK_THROWS_WITH(g.fatten(Region::empty(10), 1), "empty region");

  // composition is equality on the graph metric
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b) CHECK(g.fatten(g.fatten(z, a), b) == g.fatten(z, a + b));

  LatticeGraph grid = LatticeGraph::grid(4, 4);
  Region center = grid.fatten(Region::single(5, 16), 1);
  CHECK(center.size() == 5);  // plus shape
}

TEST_CASE("ball equals fattened singleton") {
  LatticeGraph g = LatticeGraph::grid(3, 4);
  for (int x = 0; x < g.size(); ++x)
    for (int r = 0; r <= g.diameter(); ++r)
      CHECK(g.ball(x, r) == g.fatten(Region::single(x, g.size()), r));
}

TEST_CASE("boundary") {
  LatticeGraph g = LatticeGraph::chain(10);
  Region z({0, 1, 2, 3, 4}, 10);
  CHECK(g.boundary(z).sites() == std::vector<int>{4, 5});
  CHECK(g.boundary(Region::empty(10)).is_empty());
  CHECK(g.boundary(Region::all(10)).is_empty());
  // boundary of the complement is the same set
  for (int cut = 1; cut < 9; ++cut) {
    std::vector<int> left;
    for (int i = 0; i < cut; ++i) left.push_back(i);
    Region zl(left, 10);
    CHECK(g.boundary(zl) == g.boundary(zl.complement()));
  }

  LatticeGraph grid = LatticeGraph::grid(4, 4);
  Region two_cols({0, 4, 8, 12, 1, 5, 9, 13}, 16);
  Region b = grid.boundary(two_cols);
  CHECK(b.size() == 8);
  CHECK(b.sites() == std::vector<int>{1, 2, 5, 6, 9, 10, 13, 14});
}

TEST_CASE("graph distance is a metric") {
  LatticeGraph g = LatticeGraph::grid(4, 3);
  for (int a = 0; a < g.size(); ++a) {
    CHECK(g.distance(a, a) == 0);
    for (int b = 0; b < g.size(); ++b) {
      CHECK(g.distance(a, b) == g.distance(b, a));
      if (a != b) CHECK(g.distance(a, b) > 0);
      for (int c = 0; c < g.size(); ++c)
        CHECK(g.distance(a, c) <= g.distance(a, b) + g.distance(b, c));
    }
  }
}

TEST_CASE("fit_dimension") {
  CHECK(fit_dimension(LatticeGraph::chain(20), {1.0}).c_gamma_cap == doctest::Approx(2.0));
  // frozen from the exhaustive oracle over x and r
  DimensionFit grid = fit_dimension(LatticeGraph::grid(5, 5), {2.0});
  CHECK(grid.c_gamma_cap == doctest::Approx(4.0));
  CHECK(fit_dimension(LatticeGraph::complete(8), {1.0}).c_gamma_cap == doctest::Approx(7.0));
  // candidate selection picks the smaller constant
  DimensionFit pick = fit_dimension(LatticeGraph::chain(12), {1.0, 2.0});
  CHECK(pick.c_gamma_cap <= 2.0 + 1e-12);
  CHECK_THROWS(fit_dimension(LatticeGraph::complete(8), {1.0}, 3.0));
}

TEST_CASE("dimension fit bound holds exhaustively") {
  LatticeGraph g = LatticeGraph::grid(5, 5);
  DimensionFit fit = fit_dimension(g, {2.0});
  for (int x = 0; x < g.size(); ++x)
    for (int r = 1; r <= g.diameter(); ++r)
      CHECK(g.ball(x, r).size() <= 1.0 + fit.c_gamma_cap * std::pow(r, fit.d) + 1e-9);
}

TEST_CASE("ring and explicit edge list") {
  LatticeGraph ring = LatticeGraph::ring(6);
  CHECK(ring.distance(0, 3) == 3);
  CHECK(ring.distance(0, 5) == 1);

  std::string path = "/tmp/stitchlab_edges_test.txt";
  {
    std::ofstream out(path);
    out << "0 1\n1 2\n2 3\n";
  }
  LatticeGraph g = LatticeGraph::from_edge_list_file(path);
  CHECK(g.size() == 4);
  CHECK(g.distance(0, 3) == 3);
  CHECK_THROWS(LatticeGraph::explicit_edges(4, {{0, 1}, {2, 3}}));  // disconnected
}

TEST_CASE("region algebra") {
  Region a({1, 2, 3}, 8), b({3, 4}, 8);
  CHECK(a.intersect(b).sites() == std::vector<int>{3});
  CHECK(a.unite(b).sites() == std::vector<int>{1, 2, 3, 4});
  CHECK(a.minus(b).sites() == std::vector<int>{1, 2});
  CHECK(a.intersects(b));
  CHECK(!a.subset_of(b));
  CHECK(a.intersect(b).subset_of(a));
  CHECK(a.complement().size() == 5);
}

TEST_CASE("geometric ops are pure") {
  LatticeGraph g = LatticeGraph::grid(4, 4);
  Region z({5, 6, 9}, 16);
  for (int rep = 0; rep < 3; ++rep) {
    CHECK(g.fatten(z, 2) == g.fatten(z, 2));
    CHECK(g.boundary(z) == g.boundary(z));
    CHECK(g.ball(7, 2) == g.ball(7, 2));
  }
}
