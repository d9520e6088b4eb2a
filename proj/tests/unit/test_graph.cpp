#include "geognn/error.hpp"
#include "geognn/graph.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace geognn;

namespace {

std::set<std::pair<Index, Index>> edge_set(const Graph& g) {
  std::set<std::pair<Index, Index>> s;
  for (const auto& e : g.edges) s.insert({e.sender, e.receiver});
  return s;
}

Matrix points(Index n, Index dim = 2) { return Matrix::Zero(n, dim); }

} // namespace

TEST_CASE("mesh: one triangle gives all six directed edges") {
  const std::vector<std::vector<Index>> cells{{0, 1, 2}};
  const Graph g = build_from_mesh(points(3), cells);
  CHECK(edge_set(g) == std::set<std::pair<Index, Index>>{{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}});
  CHECK(g.node_features.cols() == 0);
  CHECK(g.edge_features.cols() == 0);
  CHECK_FALSE(g.node_targets);
}

TEST_CASE("mesh: shared edge of two triangles is stored once per direction") {
  const std::vector<std::vector<Index>> cells{{0, 1, 2}, {1, 2, 3}};
  const Graph g = build_from_mesh(points(4), cells);
  CHECK(g.num_edges() == 10);
  CHECK(edge_set(g) == std::set<std::pair<Index, Index>>{{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2},
                                                         {2, 1}, {1, 3}, {3, 1}, {2, 3}, {3, 2}});
}

TEST_CASE("mesh: a two-node cell is a single segment") {
  const std::vector<std::vector<Index>> cells{{0, 1}};
  const Graph g = build_from_mesh(points(2), cells);
  CHECK(edge_set(g) == std::set<std::pair<Index, Index>>{{0, 1}, {1, 0}});
}

TEST_CASE("mesh: a quad contributes its four sides, not its diagonals") {
  const std::vector<std::vector<Index>> cells{{0, 1, 2, 3}};
  const Graph g = build_from_mesh(points(4), cells);
  CHECK(g.num_edges() == 8);
  CHECK_FALSE(edge_set(g).contains({0, 2}));
  CHECK_FALSE(edge_set(g).contains({1, 3}));
}

TEST_CASE("mesh: bad cells are rejected") {
  SUBCASE("index out of range") {
    const std::vector<std::vector<Index>> cells{{0, 1, 3}};
    CHECK_THROWS_AS(build_from_mesh(points(3), cells), Error);
    try {
      build_from_mesh(points(3), cells);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::invalid_mesh);
    }
  }
  SUBCASE("negative index") {
    const std::vector<std::vector<Index>> cells{{0, -1}};
    CHECK_THROWS_AS(build_from_mesh(points(3), cells), Error);
  }
  SUBCASE("single-node cell") {
    const std::vector<std::vector<Index>> cells{{0}};
    CHECK_THROWS_AS(build_from_mesh(points(3), cells), Error);
  }
}

TEST_CASE("mesh: edges are sorted by receiver then sender") {
  std::mt19937_64 rng(3);
  const Graph g = testing::random_graph(rng, 25);
  for (std::size_t k = 1; k < g.edges.size(); ++k) {
    const Edge& a = g.edges[k - 1];
    const Edge& b = g.edges[k];
    CHECK((a.receiver < b.receiver || (a.receiver == b.receiver && a.sender < b.sender)));
  }
}

TEST_CASE("mesh: random meshes always validate") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = std::uniform_int_distribution<Index>(2, 40)(rng);
    const Matrix pos = testing::random_matrix(rng, n, 3);
    const auto cells = testing::random_cells(rng, n);
    CHECK(validate(build_from_mesh(pos, cells)).empty());
  }
}

TEST_CASE("chain: edge counts") {
  CHECK(build_surface_chain(points(3), false).num_edges() == 4);
  CHECK(build_surface_chain(points(3), true).num_edges() == 6);
  CHECK(build_surface_chain(points(2), false).num_edges() == 2);
  CHECK(edge_set(build_surface_chain(points(3), false)) ==
        std::set<std::pair<Index, Index>>{{0, 1}, {1, 0}, {1, 2}, {2, 1}});
  for (Index n = 3; n < 30; ++n) {
    CHECK(build_surface_chain(points(n), false).num_edges() == 2 * (n - 1));
    CHECK(build_surface_chain(points(n), true).num_edges() == 2 * n);
    CHECK(validate(build_surface_chain(points(n), true)).empty());
  }
}

TEST_CASE("chain: a closed two-node chain does not double its only edge") {
  const Graph g = build_surface_chain(points(2), true);
  CHECK(g.num_edges() == 2);
  CHECK(validate(g).empty());
}

TEST_CASE("chain: fewer than two points is an error") {
  CHECK_THROWS_AS(build_surface_chain(points(1), false), Error);
  CHECK_THROWS_AS(build_surface_chain(points(0), true), Error);
}

TEST_CASE("validate: reports each violation with its location") {
  Graph g;
  g.positions = points(3);
  SUBCASE("clean triangle") {
    const std::vector<std::vector<Index>> cells{{0, 1, 2}};
    CHECK(validate(build_from_mesh(g.positions, cells)).empty());
  }
  SUBCASE("missing reverse edge") {
    g.edges = {{0, 1}};
    const auto v = validate(g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == Violation::Kind::missing_reverse_edge);
    CHECK(v[0].location == 0);
  }
  SUBCASE("self loop") {
    g.edges = {{2, 2}};
    const auto v = validate(g);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == Violation::Kind::self_loop);
  }
  SUBCASE("duplicate and out-of-range edges") {
    g.edges = {{0, 1}, {1, 0}, {0, 1}, {0, 7}};
    const auto v = validate(g);
    std::multiset<Violation::Kind> kinds;
    for (const auto& x : v) kinds.insert(x.kind);
    CHECK(kinds.count(Violation::Kind::duplicate_edge) == 1);
    CHECK(kinds.count(Violation::Kind::edge_out_of_range) == 1);
  }
  SUBCASE("feature and target row counts") {
    g.edges = {{0, 1}, {1, 0}};
    g.node_features = Matrix::Zero(2, 1);
    g.edge_features = Matrix::Zero(1, 1);
    g.node_targets = Matrix::Zero(4, 1);
    const auto v = validate(g);
    std::set<Violation::Kind> kinds;
    for (const auto& x : v) kinds.insert(x.kind);
    CHECK(kinds == std::set<Violation::Kind>{Violation::Kind::node_feature_rows, Violation::Kind::edge_feature_rows,
                                             Violation::Kind::node_target_rows});
  }
}

TEST_CASE("merge_batch: offsets, segments and counts") {
  std::mt19937_64 rng(5);
  Graph a = build_surface_chain(points(2), false);
  Graph b = build_surface_chain(points(3), false);
  for (Graph* g : {&a, &b}) {
    g->node_features = testing::random_matrix(rng, g->num_nodes(), 2);
    g->edge_features = testing::random_matrix(rng, g->num_edges(), 3);
  }
  const std::vector<Graph> members{a, b};
  const BatchedGraph batch = merge_batch(members);
  CHECK(batch.graph.num_nodes() == 5);
  CHECK(batch.graph.num_edges() == a.num_edges() + b.num_edges());
  CHECK(batch.segments == std::vector<Segment>{{0, 2}, {2, 3}});
  CHECK(edge_set(batch.graph).contains({2, 3}));
  CHECK(validate(batch.graph).empty());
  for (const auto& e : batch.graph.edges) {
    CHECK((e.sender < 2) == (e.receiver < 2));  // no edge crosses a segment
  }
}

TEST_CASE("merge_batch: a single member is returned unchanged") {
  std::mt19937_64 rng(6);
  const Graph g = testing::random_graph(rng, 9);
  const std::vector<Graph> members{g};
  const BatchedGraph batch = merge_batch(members);
  CHECK(batch.segments == std::vector<Segment>{{0, 9}});
  CHECK(batch.graph.edges == g.edges);
  CHECK(batch.graph.node_features == g.node_features);
  CHECK(batch.graph.edge_features == g.edge_features);
  CHECK(*batch.graph.node_targets == *g.node_targets);
}

TEST_CASE("merge_batch: empty list and mismatched widths are errors") {
  CHECK_THROWS_AS(merge_batch(std::span<const Graph>{}), Error);
  std::mt19937_64 rng(7);
  const std::vector<Graph> members{testing::random_graph(rng, 4, 2, 3), testing::random_graph(rng, 4, 2, 2)};
  try {
    merge_batch(members);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::incompatible_graphs);
  }
}

TEST_CASE("merge_batch then extract_member round-trips every member") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Graph> members;
    const int m = std::uniform_int_distribution<int>(1, 6)(rng);
    Index nodes = 0, edges = 0;
    for (int k = 0; k < m; ++k) {
      members.push_back(testing::random_graph(rng, std::uniform_int_distribution<Index>(2, 12)(rng)));
      nodes += members.back().num_nodes();
      edges += members.back().num_edges();
    }
    const BatchedGraph batch = merge_batch(members);
    CHECK(batch.graph.num_nodes() == nodes);
    CHECK(batch.graph.num_edges() == edges);
    for (int k = 0; k < m; ++k) {
      const Graph back = extract_member(batch, static_cast<std::size_t>(k));
      const Graph& orig = members[static_cast<std::size_t>(k)];
      CHECK(back.edges == orig.edges);
      CHECK(back.positions == orig.positions);
      CHECK(back.node_features == orig.node_features);
      CHECK(back.edge_features == orig.edge_features);
      CHECK(*back.node_targets == *orig.node_targets);
      CHECK(*back.graph_target == *orig.graph_target);
    }
  }
}
