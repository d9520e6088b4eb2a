#include "geognn/error.hpp"
#include "geognn/featurize.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace geognn;

TEST_CASE("reference point: median of x and y, z pinned to zero") {
  Matrix odd(3, 3);
  odd << 0, 5, 9,  //
      2, 7, 9,     //
      1, 6, 9;
  CHECK(reference_point_feature_design(odd).isApprox(Eigen::Vector3d(1, 6, 0)));

  Matrix even(4, 3);
  even << 3, 0, 1,  //
      0, 0, 2,      //
      2, 0, 3,      //
      1, 0, 4;
  const Eigen::Vector3d r = reference_point_feature_design(even);
  CHECK(r.x() == 1.5);
  CHECK(r.z() == 0.0);

  CHECK_THROWS_AS(reference_point_feature_design(Matrix(0, 3)), Error);
}

TEST_CASE("degree counts distinct undirected neighbours") {
  Matrix pos = Matrix::Zero(3, 2);
  const Graph chain = build_surface_chain(pos, false);
  CHECK(compute_node_degree(chain) == std::vector<Index>{1, 2, 1});
  const std::vector<std::vector<Index>> tri{{0, 1, 2}};
  CHECK(compute_node_degree(build_from_mesh(pos, tri)) == std::vector<Index>{2, 2, 2});
}

TEST_CASE("feature design: layout, L1 norm and multi-hot cell types") {
  Matrix pos(3, 3);
  pos << 0, 0, 0,  //
      1, -2, 3,    //
      -1, 2, 0;
  // Median of x {0,1,-1} and y {0,-2,2} is the origin.
  const std::vector<std::vector<Index>> cells{{0, 1}, {0, 2}};
  const Graph g = build_from_mesh(pos, cells);
  const std::vector<std::vector<std::string>> types{{"hex", "tet"}, {"tet"}, {"pyramid"}};
  const Matrix f = encode_nodes_feature_design(g, types, default_cell_types());
  REQUIRE(f.cols() == feature_design_width(4));
  REQUIRE(f.cols() == 9);

  CHECK(f.row(0).head(4).isZero());
  CHECK(f.row(1).head(3) == Eigen::RowVector3d(1, -2, 3));
  CHECK(f(1, 3) == 6.0);
  // vocabulary order: tet, hex, wedge, pyramid
  CHECK(f.row(0).segment(4, 4) == Eigen::RowVector4d(1, 1, 0, 0));
  CHECK(f.row(2).segment(4, 4) == Eigen::RowVector4d(0, 0, 0, 1));
  CHECK(f(0, 8) == 2.0);
  CHECK(f(1, 8) == 1.0);
}

TEST_CASE("feature design: unknown cell type is a vocabulary error") {
  Matrix pos = Matrix::Zero(2, 3);
  const std::vector<std::vector<Index>> cells{{0, 1}};
  const Graph g = build_from_mesh(pos, cells);
  const std::vector<std::vector<std::string>> types{{"tet"}, {"prism"}};
  try {
    encode_nodes_feature_design(g, types, default_cell_types());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::vocabulary);
  }
}

TEST_CASE("feature design: translation by (cx, cy, 0) leaves features unchanged") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = std::uniform_int_distribution<Index>(2, 30)(rng);
    const Matrix pos = testing::random_matrix(rng, n, 3);
    const auto cells = testing::random_cells(rng, n);
    const std::vector<std::vector<std::string>> types(static_cast<std::size_t>(n), {"tet"});
    Graph g = build_from_mesh(pos, cells);
    const Matrix before = encode_nodes_feature_design(g, types, default_cell_types());
    const double cx = shift(rng), cy = shift(rng);
    g.positions.col(0).array() += cx;
    g.positions.col(1).array() += cy;
    const Matrix after = encode_nodes_feature_design(g, types, default_cell_types());
    CHECK((before - after).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("airfoil node features") {
  Matrix pos(2, 2);
  pos << 0, 0,  //
      0.5, 0.1;
  const Graph g = build_surface_chain(pos, false);
  SUBCASE("upper node at the origin") {
    const Matrix f = encode_nodes_airfoil(g, {true, false}, 1.0, 0.0);
    REQUIRE(f.cols() == airfoil_width);
    CHECK(f.row(0) == (Eigen::RowVectorXd(6) << 0, 0, 1, 0, 1, 0).finished());
  }
  SUBCASE("lower node with a freestream") {
    const Matrix f = encode_nodes_airfoil(g, {true, false}, 0.8, -0.2);
    CHECK(f.row(1) == (Eigen::RowVectorXd(6) << 0.5, 0.1, 0, 1, 0.8, -0.2).finished());
    CHECK(f.col(4).isConstant(0.8));
    CHECK(f.col(5).isConstant(-0.2));
  }
  SUBCASE("flag count must match") { CHECK_THROWS_AS(encode_nodes_airfoil(g, {true}, 1.0, 0.0), Error); }
}

TEST_CASE("edge features: displacement and length") {
  Matrix pos(3, 2);
  pos << 0, 0,  //
      3, 4,     //
      0, 0;
  const std::vector<std::vector<Index>> cells{{0, 1}, {0, 2}};
  const Graph g = build_from_mesh(pos, cells);
  const Matrix f = encode_edges(g);
  REQUIRE(f.cols() == 3);
  for (Index k = 0; k < g.num_edges(); ++k) {
    const Edge& e = g.edges[static_cast<std::size_t>(k)];
    if (e.sender == 1 && e.receiver == 0) CHECK(f.row(k) == Eigen::RowVector3d(3, 4, 5));
    if (e.sender == 0 && e.receiver == 1) CHECK(f.row(k) == Eigen::RowVector3d(-3, -4, 5));
    if (e.sender == 2 || e.receiver == 2) CHECK(f.row(k).isZero());
  }
}

TEST_CASE("edge features: antisymmetric displacement, translation invariant") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    Graph g = testing::random_graph(rng, 15, 3);
    const Matrix f = encode_edges(g);
    for (Index k = 0; k < g.num_edges(); ++k) {
      const Edge& e = g.edges[static_cast<std::size_t>(k)];
      for (Index r = 0; r < g.num_edges(); ++r) {
        const Edge& back = g.edges[static_cast<std::size_t>(r)];
        if (back.sender == e.receiver && back.receiver == e.sender) {
          CHECK((f.row(k).head(3) + f.row(r).head(3)).isZero());
          CHECK(f(k, 3) == f(r, 3));
        }
      }
    }
    g.positions.rowwise() += testing::random_matrix(rng, 1, 3, -100, 100).row(0);
    CHECK((encode_edges(g) - f).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("normalizer") {
  SUBCASE("column {0,2} maps to {-1,1}; constant column passes through") {
    Matrix m(2, 2);
    m << 0, 7,  //
        2, 7;
    const Normalizer n = Normalizer::fit(m);
    const Matrix z = n.apply(m);
    CHECK(z.col(0) == Eigen::Vector2d(-1, 1));
    CHECK(z.col(1) == Eigen::Vector2d(7, 7));
    CHECK(n.scale()(1) == 1.0);
  }
  SUBCASE("fit then apply on training data gives zero column means") {
    std::mt19937_64 rng(23);
    const Matrix a = testing::random_matrix(rng, 40, 5, -3, 9);
    const Matrix b = testing::random_matrix(rng, 25, 5, -3, 9);
    const Normalizer n = Normalizer::fit(std::vector<const Matrix*>{&a, &b});
    Matrix both(65, 5);
    both << n.apply(a), n.apply(b);
    CHECK(both.colwise().mean().cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((n.invert(n.apply(a)) - a).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("use before fit and width mismatch are errors") {
    const Normalizer empty;
    CHECK_THROWS_AS(empty.apply(Matrix::Zero(1, 1)), Error);
    const Normalizer n = Normalizer::fit(Matrix::Ones(3, 2));
    CHECK_THROWS_AS(n.apply(Matrix::Zero(1, 3)), Error);
  }
}

TEST_CASE("pressure target normalization") {
  SUBCASE("uniform pressure de-means to zero") {
    const auto r = normalize_pressure_target(Vector::Constant(5, 3.0), 0.3, 0.4);
    CHECK(r.values.isZero());
  }
  SUBCASE("vel is u0^2 + v0^2 without a square root") {
    const auto r = normalize_pressure_target(Eigen::Vector2d(2, 4), 1, 1);
    CHECK(r.vel == 2.0);
    CHECK(r.mean == 1.5);
    CHECK(r.values == Eigen::Vector2d(-0.5, 0.5));
  }
  SUBCASE("speed divisor option") {
    const auto r = normalize_pressure_target(Eigen::Vector2d(2, 4), 3, 4, VelocityDivisor::speed);
    CHECK(r.vel == 5.0);
  }
  SUBCASE("inverse recovers the pressure") {
    std::mt19937_64 rng(24);
    const Vector p = testing::random_matrix(rng, 30, 1, -5, 5).col(0);
    const auto r = normalize_pressure_target(p, 0.7, -0.3);
    CHECK((denormalize_pressure_target(r.values, r.mean, r.vel) - p).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("zero freestream is degenerate") {
    try {
      normalize_pressure_target(Eigen::Vector2d(1, 2), 0, 0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::degenerate_freestream);
    }
  }
}
