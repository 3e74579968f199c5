#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cplab/topology.hpp"

using namespace cplab;

TEST_SUITE("topology") {

TEST_CASE("1-d lattice: ids, coords, edges, origin") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 2});
  REQUIRE(g.vertex_count() == 5);
  CHECK(g.edge_count() == 4);
  CHECK(g.dim() == 1);
  // Ids enumerate coordinates from -R upward.
  for (int i = 0; i < 5; ++i) CHECK(g.coord(VertexId(i), 0) == i - 2);
  CHECK(g.origin() == 2);
  CHECK(g.coord(g.origin(), 0) == 0);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(2) == 2);
  CHECK(g.vertex_at(std::vector<std::int32_t>{-2}) == 0);
  CHECK(g.vertex_at(std::vector<std::int32_t>{3}) == g.vertex_count());  // outside
}

TEST_CASE("1-d periodic lattice closes the ring") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 2}, BoundaryPolicy::periodic);
  CHECK(g.vertex_count() == 5);
  CHECK(g.edge_count() == 5);
  for (VertexId v = 0; v < 5; ++v) CHECK(g.degree(v) == 2);
}

TEST_CASE("2-d lattice sizes and ball counts") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{2, 3});
  REQUIRE(g.vertex_count() == 49);
  CHECK(g.edge_count() == 84);  // 2 axes * 7 rows * 6 links
  CHECK(ball(g, g.origin(), 1).count() == 5);
  CHECK(ball(g, g.origin(), 2).count() == 13);
  CHECK(ball(g, g.origin(), 3).count() == 25);
  CHECK(g.safe_radius(g.origin()) == 3);
  CHECK_THROWS(ball(g, g.origin(), 4));  // would be truncation-biased
  CHECK_THROWS(ball(g, 0, 1));           // corner has safe radius 0
}

TEST_CASE("half-line is a path rooted at 0") {
  const GraphTopology g = GraphTopology::build(HalfLineExtent{4});
  REQUIRE(g.vertex_count() == 4);
  CHECK(g.edge_count() == 3);
  CHECK(g.origin() == 0);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(1) == 2);
  CHECK(g.degree(3) == 1);
  CHECK(g.safe_radius(0) == 3);
}

TEST_CASE("tree: root fanout, labels, depth bookkeeping") {
  const GraphTopology g = GraphTopology::build(TreeExtent{2, 2});
  REQUIRE(g.vertex_count() == 10);  // 1 + 3 + 6
  CHECK(g.edge_count() == 9);
  CHECK(g.origin() == 0);
  CHECK(g.degree(0) == 3);
  CHECK(g.tree_truncation_depth() == 2);
  CHECK(g.tree_label(0) == TreeLabel{0});
  CHECK(g.tree_depth(0) == 0);
  // Root's children carry labels {0,1} {0,2} {0,3} in id order.
  CHECK(g.tree_label(1) == TreeLabel{0, 1});
  CHECK(g.tree_label(2) == TreeLabel{0, 2});
  CHECK(g.tree_label(3) == TreeLabel{0, 3});
  CHECK(g.tree_parent(1) == 0);
  CHECK(g.tree_first_child(0) == 1);
  CHECK(g.tree_child_count(0) == 3);
  CHECK(g.tree_child_count(1) == 2);
  // Depth-2 vertices have two children... none, as depth 2 is the cut.
  CHECK(g.tree_child_count(4) == 0);
}

TEST_CASE("tree head-set counts match the enumeration table") {
  // Independently enumerated: within depth n the head set (labels not
  // ending in 1, root included) and the ball sizes are:
  const std::uint64_t ball2[] = {4, 10, 22, 46, 94, 190};
  const std::uint64_t head2[] = {3, 6, 12, 24, 48, 96};
  const GraphTopology g2 = GraphTopology::build(TreeExtent{2, 6});
  const VertexSubset d2 = tree_delta(g2);
  for (int n = 1; n <= 6; ++n) {
    const VertexSubset b = ball(g2, 0, static_cast<std::uint32_t>(n));
    CHECK(b.count() == ball2[n - 1]);
    std::uint64_t in = 0;
    for (VertexId v = 0; v < g2.vertex_count(); ++v) {
      if (b.contains(v) && d2.contains(v)) ++in;
    }
    CHECK(in == head2[n - 1]);
  }

  const std::uint64_t ball3[] = {5, 17, 53, 161};
  const std::uint64_t head3[] = {4, 12, 36, 108};
  const GraphTopology g3 = GraphTopology::build(TreeExtent{3, 4});
  const VertexSubset d3 = tree_delta(g3);
  for (int n = 1; n <= 4; ++n) {
    const VertexSubset b = ball(g3, 0, static_cast<std::uint32_t>(n));
    CHECK(b.count() == ball3[n - 1]);
    std::uint64_t in = 0;
    for (VertexId v = 0; v < g3.vertex_count(); ++v) {
      if (b.contains(v) && d3.contains(v)) ++in;
    }
    CHECK(in == head3[n - 1]);
  }

  // Cumulative fractions from density_profile agree with the counts.
  const std::vector<double> prof = density_profile(g2, d2, 0, 6);
  for (int n = 1; n <= 6; ++n) {
    CHECK(prof[n - 1] ==
          doctest::Approx(double(head2[n - 1]) / double(ball2[n - 1])).epsilon(1e-14));
  }
}

TEST_CASE("rays partition the tree and follow first-child chains") {
  const GraphTopology g = GraphTopology::build(TreeExtent{2, 5});
  const VertexSubset delta = tree_delta(g);
  const std::vector<VertexId> heads = ray_heads(g);

  std::vector<int> covered(g.vertex_count(), 0);
  for (VertexId h = 0; h < g.vertex_count(); ++h) {
    if (!delta.contains(h)) continue;
    VertexId prev = h;
    for (VertexId v : ray(g, h)) {
      ++covered[v];
      CHECK(heads[v] == h);
      if (v != h) {
        CHECK(g.tree_parent(v) == prev);
        CHECK(g.tree_label(v).back() == 1);
      }
      prev = v;
    }
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) CHECK(covered[v] == 1);

  // Rays run from their head's depth down to the cut.
  CHECK(ray(g, 0).size() == 6);
  CHECK_THROWS(ray(g, 1));  // label {0,1} ends in 1: not a head
}

TEST_CASE("slab geometry and cells") {
  const GraphTopology g = GraphTopology::build(SlabExtent{2, 2, 3});
  REQUIRE(g.vertex_count() == 14);  // 2 columns x 7 rows
  CHECK(g.dim() == 2);
  // Width-1 cells split the two columns; width-2 cells merge them.
  std::set<std::uint64_t> cells1, cells2;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    cells1.insert(slab_cell(g, v, 1));
    cells2.insert(slab_cell(g, v, 2));
  }
  CHECK(cells1.size() == 2);
  CHECK(cells2.size() == 1);
}

TEST_CASE("slab_cell on a 1-d lattice is constant") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 4});
  const std::uint64_t c = slab_cell(g, 0, 3);
  for (VertexId v = 0; v < g.vertex_count(); ++v) CHECK(slab_cell(g, v, 3) == c);
}

TEST_CASE("sublattice picks the coordinate band") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 3});
  const VertexSubset s = sublattice(g, 2);
  CHECK(s.count() == 2);
  CHECK(s.contains(g.vertex_at(std::vector<std::int32_t>{0})));
  CHECK(s.contains(g.vertex_at(std::vector<std::int32_t>{1})));
  CHECK(!s.contains(g.origin() - 1));
}

TEST_CASE("explicit graphs take arbitrary connected edge lists") {
  ExplicitExtent e;
  e.vertex_count = 3;
  e.edges = {{0, 1}, {1, 2}, {0, 2}};
  const GraphTopology g = GraphTopology::build(e);
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 3);
  for (VertexId v = 0; v < 3; ++v) CHECK(g.degree(v) == 2);

  ExplicitExtent bad;
  bad.vertex_count = 3;
  bad.edges = {{0, 1}};  // vertex 2 disconnected
  CHECK_THROWS(GraphTopology::build(bad));
}

TEST_CASE("distances match the grid metric") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{2, 2});
  const auto dist = g.distances_from(g.origin());
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const auto want = std::abs(g.coord(v, 0)) + std::abs(g.coord(v, 1));
    CHECK(dist[v] == static_cast<std::uint32_t>(want));
  }
}

TEST_CASE("growth exponent of the 1-d lattice approaches linear growth") {
  const GraphTopology g = GraphTopology::build(LatticeExtent{1, 10});
  const auto ge = growth_exponent(g, g.origin(), 10);
  // |B(n)| = 2n+1, so the exponent is (2n+1)^(1/n).
  for (std::uint32_t n = 1; n <= 10; ++n) {
    CHECK(ge[n - 1] == doctest::Approx(std::pow(2.0 * n + 1.0, 1.0 / n)).epsilon(1e-12));
  }
}

TEST_CASE("hashes separate topologies; describe is stable") {
  const GraphTopology a = GraphTopology::build(LatticeExtent{1, 2});
  const GraphTopology b = GraphTopology::build(LatticeExtent{1, 3});
  const GraphTopology c = GraphTopology::build(HalfLineExtent{5});
  const GraphTopology d = GraphTopology::build(LatticeExtent{1, 2});
  CHECK(a.hash() != b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.hash() == d.hash());
  CHECK(a.describe() == "lattice d=1 R=2");
  CHECK(c.describe() == "half-line n=5");
}

TEST_CASE("arrows enumerate both directions of every edge") {
  const GraphTopology g = GraphTopology::build(HalfLineExtent{3});
  CHECK(g.arrow_count() == 4);
  std::set<std::pair<VertexId, VertexId>> seen;
  for (std::uint64_t a = 0; a < g.arrow_count(); ++a) {
    seen.insert({g.arrow_from(a), g.arrow_to(a)});
  }
  CHECK(seen ==
        std::set<std::pair<VertexId, VertexId>>{{0, 1}, {1, 0}, {1, 2}, {2, 1}});
}

TEST_CASE("edge list export format") {
  const GraphTopology g = GraphTopology::build(HalfLineExtent{3});
  std::ostringstream os;
  g.write_edge_list(os);
  CHECK(os.str() == "#vertices 3\n0 1\n1 2\n");
}

TEST_CASE("invalid extents are rejected") {
  CHECK_THROWS(GraphTopology::build(LatticeExtent{0, 2}));
  CHECK_THROWS(GraphTopology::build(TreeExtent{2, 3}, BoundaryPolicy::periodic));
  CHECK_THROWS(GraphTopology::build(HalfLineExtent{0}));
  CHECK_THROWS(GraphTopology::build(SlabExtent{1, 2, 3}));  // slabs need dim >= 2
  CHECK_THROWS(GraphTopology::build(LatticeExtent{2, 2000}));  // budget
}

}  // TEST_SUITE
