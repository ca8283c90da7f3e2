#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "boltzgap/constraints.hpp"
#include "boltzgap/direct.hpp"
#include "boltzgap/error.hpp"
#include "boltzgap/grad.hpp"
#include "boltzgap/spectra.hpp"

using namespace boltzgap;

namespace {

// Same quadrature as the assembler, but every sweep is run on the real mesh.
Eigen::MatrixXd uncached_direct(const Mesh& mesh, const BasisSpec& basis, const OperatorParams& params, int tri) {
  const int d = mesh.d(), nl = basis.n_local(), M = basis_size(mesh, basis);
  const double dv = mesh.dv();
  const TriangleRule rule = make_triangle_rule(tri);
  SphereSweep sweep(mesh, basis, make_cross_section(params));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, M);
  const int nq = static_cast<int>(rule.nodes.size());
  int total = 1;
  for (int i = 0; i < d; ++i) total *= nq;
  for (int c = 0; c < mesh.cells(); ++c) {
    const Index3 k = mesh.multi(c);
    for (int cb = 0; cb < mesh.cells(); ++cb) {
      const Index3 m = mesh.multi(cb);
      for (int n = 0; n < total; ++n) {
        Point v{}, vs{}, u{}, mu{};
        double w = 1.0;
        for (int i = 0, rem = n; i < d; ++i, rem /= nq) {
          const int a = rem % nq;
          v[i] = mesh.lower(k[i]) + dv * rule.nodes[a][0];
          vs[i] = mesh.lower(m[i]) + dv * rule.nodes[a][1];
          u[i] = v[i] - vs[i];
          mu[i] = -u[i];
          w *= dv * dv * rule.weights[a];
        }
        const double un = std::sqrt(norm2(u, d));
        if (un == 0.0) continue;
        const double W = w * maxwellian(v, d) * maxwellian(vs, d) * std::pow(un, params.gamma) / mesh.volume();
        for (int side = 0; side < 2; ++side)
          for (const auto& [col, val] : side == 0 ? sweep.run(v, u) : sweep.run(vs, mu))
            for (int l = 0; l < nl; ++l) A(c * nl + l, col) -= W * basis_value(l, v, mesh.center(k), dv) * val;
      }
    }
  }
  return 0.5 * (A + A.transpose());
}

double monomial_rule(const TriangleRule& r, int a, int b) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    s += r.weights[i] * std::pow(r.nodes[i][0], a) * std::pow(r.nodes[i][1], b);
  return s;
}

}  // namespace

TEST_CASE("triangle rules") {
  const int degree[] = {0, 1, 0, 2, 0, 0, 4, 5};
  for (int pts : {1, 3, 6, 7}) {
    const TriangleRule r = make_triangle_rule(pts);
    REQUIRE(static_cast<int>(r.nodes.size()) == 2 * pts);
    double wsum = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const auto [s, t] = r.nodes[i];
      CHECK(s > 0.0);
      CHECK(s < 1.0);
      CHECK(t > 0.0);
      CHECK(t < 1.0);
      CHECK(s != t);
      wsum += r.weights[i];
      const auto [s2, t2] = r.nodes[r.swapped[i]];
      CHECK(s2 == doctest::Approx(t));
      CHECK(t2 == doctest::Approx(s));
      const auto [s3, t3] = r.nodes[r.reflected[i]];
      CHECK(s3 == doctest::Approx(1.0 - s));
      CHECK(t3 == doctest::Approx(1.0 - t));
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int a = 0; a <= degree[pts]; ++a)
      for (int b = 0; a + b <= degree[pts]; ++b)
        CHECK(monomial_rule(r, a, b) == doctest::Approx(1.0 / ((a + 1) * (b + 1))).epsilon(1e-13));
  }
  CHECK_THROWS_AS(make_triangle_rule(2), Error);
}

TEST_CASE("direct assembly: symmetric, semi-definite, annihilates exact invariants") {
  // semi-definiteness holds up to the error of the outer rule; the low-order
  // rules leave small negative eigenvalues, so this uses the 7-point rule
  const int d = 2;
  DirectSettings st;
  st.tri_order = 7;
  for (int p : {0, 1}) {
    const Mesh mesh(4.0, 6, d);
    const BasisSpec basis = make_basis(p, d);
    const CollisionMatrix G = assemble_direct(mesh, basis, make_params(d, 0.0, -1.0), st);
    CHECK(G.representation == Representation::g);
    CHECK(G.backend == Backend::direct);
    CHECK((G.entries - G.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(eig_sym(G.entries).minCoeff() >= -1e-8 * G.norm());
    CHECK(G.diagnostics.angular_failures == 0);
    const BlockDiagonal D = mass_matrix(mesh, basis, Representation::g);
    auto rq = [&](const ScalarField& f) {
      const CoefficientVector x = l2_project(f, mesh, basis, Representation::g);
      return quadratic_form(G, x) / x.values.dot(D.dense() * x.values);
    };
    CHECK(rq([](const Point&) { return 1.0; }) < 1e-3);
    if (p == 1) {
      CHECK(rq([](const Point& v) { return v[0]; }) < 1e-3);
      CHECK(rq([](const Point& v) { return v[1]; }) < 1e-3);
    }
  }
}

TEST_CASE("cached sweeps reproduce the uncached assembly") {
  for (int d : {2, 3})
    for (double alpha : {-1.0, 0.5}) {
      const Mesh mesh(3.0, d == 2 ? 5 : 3, d);
      const BasisSpec basis = make_basis(1, d);
      const OperatorParams params = make_params(d, 0.5, alpha);
      const int tri = d == 2 ? 3 : 1;
      DirectSettings st;
      st.tri_order = tri;
      DirectAssembler asmb(mesh, basis, params, st);
      const CollisionMatrix G = assemble_full(asmb, 1, default_memory_budget);
      const Eigen::MatrixXd R = uncached_direct(mesh, basis, params, tri);
      const double scale = R.cwiseAbs().maxCoeff();
      CHECK((G.entries - R).cwiseAbs().maxCoeff() < 1e-7 * scale);
      CHECK(asmb.cached_sweeps() > 0);
    }
}

TEST_CASE("direct assembly is independent of the worker count") {
  const Mesh mesh(4.0, 6, 2);
  const BasisSpec basis = make_basis(1, 2);
  DirectSettings one, many;
  many.threads = 3;
  const CollisionMatrix a = assemble_direct(mesh, basis, make_params(2, 1.0, 0.0), one);
  const CollisionMatrix b = assemble_direct(mesh, basis, make_params(2, 1.0, 0.0), many);
  CHECK((a.entries - b.entries).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("direct and grad backends agree on a coarse Maxwell mesh") {
  const Mesh mesh(4.0, 4, 2);
  const BasisSpec basis = make_basis(0, 2);
  const OperatorParams params = make_params(2, 0.0, -1.0);
  DirectSettings ds;
  ds.tri_order = 7;
  const CollisionMatrix Gd = assemble_direct(mesh, basis, params, ds);
  GradSettings gs;
  gs.representation = Representation::g;
  const CollisionMatrix Gg = assemble_grad(mesh, basis, params, make_nu_profile(params, mesh), gs);
  const double a = spectral_gap(Gd, constraint_matrix(mesh, basis, Representation::g), GapMethod::nullspace).gap;
  const double b = spectral_gap(Gg, constraint_matrix(mesh, basis, Representation::g), GapMethod::nullspace).gap;
  CHECK(a == doctest::Approx(b).epsilon(0.05));
}

TEST_CASE("quadratic form") {
  const Mesh mesh(4.0, 4, 2);
  const BasisSpec basis = make_basis(0, 2);
  const CollisionMatrix G = assemble_direct(mesh, basis, make_params(2, 0.0, -1.0));
  CoefficientVector x{Eigen::VectorXd::Zero(G.size()), Representation::g};
  CHECK(quadratic_form(G, x) == 0.0);
  for (int j = 0; j < G.size(); ++j) {
    x.values.setZero();
    x.values[j] = 1.0;
    CHECK(quadratic_form(G, x) == doctest::Approx(G.entries(j, j)));
    CHECK(quadratic_form(G, x) >= -1e-8 * G.norm());
  }
  x.representation = Representation::F;
  CHECK_THROWS_AS(quadratic_form(G, x), Error);
  CoefficientVector y{Eigen::VectorXd::Zero(3), Representation::g};
  CHECK_THROWS_AS(quadratic_form(G, y), Error);
}

TEST_CASE("matrix dump round trip and memory budget") {
  const Mesh mesh(4.0, 4, 2);
  const BasisSpec basis = make_basis(1, 2);
  const CollisionMatrix G = assemble_direct(mesh, basis, make_params(2, 0.0, -1.0));
  const std::string path = (std::filesystem::temp_directory_path() / "boltzgap_dump_test.bin").string();
  write_matrix_dump(path, G);
  CHECK(std::filesystem::file_size(path) == 32 + 8 * static_cast<std::uintmax_t>(G.size()) * G.size());
  const CollisionMatrix R = read_matrix_dump(path);
  CHECK(R.size() == G.size());
  CHECK(R.N == 4);
  CHECK(R.p == 1);
  CHECK(R.params.d == 2);
  CHECK(R.representation == Representation::g);
  CHECK(R.backend == Backend::direct);
  CHECK((R.entries - G.entries).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_matrix_dump(path), Error);

  DirectAssembler asmb(mesh, basis, make_params(2, 0.0, -1.0));
  try {
    assemble_full(asmb, 1, 1000.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::memory_budget);
  }
}
