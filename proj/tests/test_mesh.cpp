#include <doctest.h>

#include <cmath>
#include <random>

#include "boltzgap/error.hpp"
#include "boltzgap/kernels.hpp"
#include "boltzgap/mesh.hpp"
#include "boltzgap/quadrature.hpp"

using namespace boltzgap;

TEST_CASE("mesh construction") {
  const Mesh a = build_mesh(5, 20, 2);
  CHECK(a.dv() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a.cells() == 400);
  const Mesh b = build_mesh(5, 24, 2);
  CHECK(b.dv() == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
  CHECK(b.cells() == 576);
  CHECK(build_mesh(5, 20, 3).cells() == 8000);
  CHECK(b.dv() * b.N() == 10.0);

  CHECK_THROWS_AS(build_mesh(0, 4, 2), Error);
  CHECK_THROWS_AS(build_mesh(-1, 4, 2), Error);
  CHECK_THROWS_AS(build_mesh(5, 1, 2), Error);
  CHECK_THROWS_AS(build_mesh(5, 4, 4), Error);
}

TEST_CASE("element centers tile the cube") {
  const Mesh m(5, 20, 2);
  CHECK(m.center(0) == doctest::Approx(-4.75));
  CHECK(m.center(19) == doctest::Approx(4.75));
  for (int k = 0; k + 1 < m.N(); ++k) CHECK(m.upper(k) == doctest::Approx(m.lower(k + 1)).epsilon(1e-15));
}

TEST_CASE("locate uses half-open elements") {
  const Mesh m(5, 20, 2);
  auto k = m.locate({0, 0, 0});
  REQUIRE(k);
  CHECK((*k)[0] == 10);
  CHECK((*k)[1] == 10);
  k = m.locate({-5, -5, 0});
  REQUIRE(k);
  CHECK((*k)[0] == 0);
  CHECK((*k)[1] == 0);
  CHECK_FALSE(m.locate({5, 0, 0}));
  CHECK_FALSE(m.locate({0, -5.0000001, 0}));
}

TEST_CASE("locate agrees with element membership on random points") {
  std::mt19937_64 rng(11);
  for (int d : {2, 3}) {
    const Mesh m(5, 7, d);
    std::uniform_real_distribution<double> U(-5, 5);
    int bad = 0;
    for (int s = 0; s < 1000000 / d; ++s) {
      Point v{U(rng), U(rng), d == 3 ? U(rng) : 0.0};
      const auto k = m.locate(v);
      if (!k) {
        ++bad;
        continue;
      }
      for (int i = 0; i < d; ++i)
        if (!(v[i] >= m.lower((*k)[i]) && v[i] < m.upper((*k)[i]))) ++bad;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("flat and multi indices are inverse") {
  const Mesh m(3, 5, 3);
  for (int c = 0; c < m.cells(); ++c) CHECK(m.flat(m.multi(c)) == c);
  CHECK(m.flat({1, 2, 3}) == 1 + 5 * (2 + 5 * 3));
}

TEST_CASE("operator parameter ranges") {
  CHECK_NOTHROW(make_params(2, 0.0, -1.0));
  CHECK_NOTHROW(make_params(3, 1.0, 1.9));
  CHECK_THROWS_AS(make_params(4, 0.0, -1.0), Error);
  CHECK_THROWS_AS(make_params(2, -2.0, -1.0), Error);
  CHECK_THROWS_AS(make_params(2, 1.5, -1.0), Error);
  CHECK_THROWS_AS(make_params(2, 0.0, 2.0), Error);
  OperatorParams p = make_params(3, 0.0, 0.0);
  CHECK_FALSE(p.b_normalized);
  p.b_normalized = true;
  CHECK_THROWS_AS(p.validate(), Error);
  CHECK(make_params(3, 0.0, -2.0).b_normalized);
}

TEST_CASE("local basis is orthogonal on each element") {
  for (int d : {2, 3}) {
    const Mesh m(2, 4, d);
    const BasisSpec b = make_basis(1, d);
    const Index3 k{1, 2, d == 3 ? 3 : 0};
    const ElementRule er = element_rule(m, k, 4);
    const Point w = m.center(k);
    for (int a = 0; a < b.n_local(); ++a)
      for (int c = 0; c < b.n_local(); ++c) {
        double s = 0.0;
        for (std::size_t q = 0; q < er.nodes.size(); ++q)
          s += er.weights[q] * basis_value(a, er.nodes[q], w, m.dv()) * basis_value(c, er.nodes[q], w, m.dv());
        CHECK(s == doctest::Approx(a == c ? basis_norm2(a) : 0.0).epsilon(1e-12));
      }
  }
}

TEST_CASE("F-representation mass matrix") {
  const Mesh m(2, 3, 3);
  const BlockDiagonal D = mass_matrix(m, make_basis(1, 3), Representation::F);
  const Eigen::MatrixXd Dd = D.dense();
  for (int i = 0; i < D.size(); ++i)
    for (int j = 0; j < D.size(); ++j) CHECK(Dd(i, j) == (i == j ? (i % 4 == 0 ? 1.0 : 1.0 / 12.0) : 0.0));
  const Eigen::MatrixXd D0 = mass_matrix(m, make_basis(0, 3), Representation::F).dense();
  CHECK((D0 - Eigen::MatrixXd::Identity(D0.rows(), D0.cols())).norm() == 0.0);
}

TEST_CASE("g-representation mass matrix on [0, 0.5)^2") {
  const Mesh m(5, 20, 2);
  const BlockDiagonal D = mass_matrix(m, make_basis(0, 2), Representation::g);
  const int c = m.flat({10, 10, 0});
  // (2 pi)^{-1/2} int_0^{1/2} exp(-t^2/2) dt = erf(1/(2 sqrt 2)) / 2
  const double g1 = 0.5 * std::erf(0.5 / std::sqrt(2.0));
  CHECK(D(c, c) == doctest::Approx(g1 * g1 / 0.25).epsilon(1e-12));
}

TEST_CASE("L2 projection") {
  const Mesh m(5, 20, 2);
  const BasisSpec p0 = make_basis(0, 2), p1 = make_basis(1, 2);
  const CoefficientVector one = l2_project([](const Point&) { return 1.0; }, m, p0);
  CHECK(one.values.minCoeff() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(one.values.maxCoeff() == doctest::Approx(1.0).epsilon(1e-13));

  const CoefficientVector lin = l2_project([](const Point& v) { return v[0] - 2.0 * v[1] + 0.3; }, m, p1);
  for (int c = 0; c < m.cells(); ++c) {
    const Point w = m.center(m.multi(c));
    CHECK(lin.values[3 * c] == doctest::Approx(w[0] - 2.0 * w[1] + 0.3).epsilon(1e-12).scale(1.0));
    CHECK(lin.values[3 * c + 1] == doctest::Approx(m.dv()).epsilon(1e-12));
    CHECK(lin.values[3 * c + 2] == doctest::Approx(-2.0 * m.dv()).epsilon(1e-12));
  }

  const CoefficientVector sq = l2_project([](const Point& v) { return v[0] * v[0]; }, m, p1);
  const int c = m.flat({10, 10, 0});
  CHECK(sq.values[3 * c] == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
}
