#include <doctest.h>

#include <cmath>
#include <random>

#include "boltzgap/constraints.hpp"
#include "boltzgap/error.hpp"
#include "boltzgap/grad.hpp"
#include "boltzgap/spectra.hpp"
#include "boltzgap/symmetry.hpp"

using namespace boltzgap;

namespace {

Eigen::MatrixXd random_spd(int n, unsigned seed, double shift) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> G;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = G(rng);
  return A * A.transpose() / n + shift * Eigen::MatrixXd::Identity(n, n);
}

// Largest eigenvalue by power iteration; smallest by inverse iteration.
double power_extreme(const Eigen::MatrixXd& A, bool inverse) {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(A.rows());
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  if (inverse) ldlt.compute(A);
  double lam = 0.0;
  for (int it = 0; it < 5000; ++it) {
    Eigen::VectorXd y = inverse ? Eigen::VectorXd(ldlt.solve(x)) : Eigen::VectorXd(A * x);
    y.normalize();
    const double next = y.dot(A * y);
    x = y;
    if (std::abs(next - lam) < 1e-15 * std::abs(next)) {
      lam = next;
      break;
    }
    lam = next;
  }
  return lam;
}

struct Maxwell2d {
  Mesh mesh;
  BasisSpec basis;
  OperatorParams params;
  CollisionMatrix G;
  ConstraintSet cs;
  explicit Maxwell2d(int N, int p = 0)
      : mesh(5.0, N, 2),
        basis(make_basis(p, 2)),
        params(make_params(2, 0.0, -1.0)),
        G(assemble_grad(mesh, basis, params, make_nu_profile(params, mesh))),
        cs(constraint_matrix(mesh, basis, Representation::F)) {}
};

}  // namespace

TEST_CASE("dense symmetric eigenvalues") {
  Eigen::MatrixXd A(2, 2);
  A << 2, 1, 1, 2;
  const Eigen::VectorXd e = eig_sym(A);
  CHECK(e[0] == doctest::Approx(1.0));
  CHECK(e[1] == doctest::Approx(3.0));
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(2, 2) * 2.0;
  const Eigen::VectorXd g = eig_sym(A, &B);
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[1] == doctest::Approx(1.5));

  const Eigen::MatrixXd R = random_spd(50, 7, 0.1);
  const Eigen::VectorXd r = eig_sym(R);
  CHECK(r[0] == doctest::Approx(power_extreme(R, true)).epsilon(1e-9));
  CHECK(r[49] == doctest::Approx(power_extreme(R, false)).epsilon(1e-9));
  for (int i = 1; i < 50; ++i) CHECK(r[i] >= r[i - 1]);
  CHECK(r.sum() == doctest::Approx(R.trace()).epsilon(1e-12));
}

TEST_CASE("shift-invert Lanczos matches the dense solver") {
  const Eigen::MatrixXd A = random_spd(120, 9, 0.05);
  const Eigen::MatrixXd B = random_spd(120, 11, 1.0);
  const Eigen::VectorXd dense = eig_sym(A, &B);
  const Eigen::VectorXd it = lanczos_smallest(A, &B, 6, 1e-10);
  REQUIRE(it.size() >= 6);
  for (int i = 0; i < 6; ++i) CHECK(it[i] == doctest::Approx(dense[i]).epsilon(1e-8));
}

TEST_CASE("Maxwell eigenvalue oracle") {
  CHECK(std::abs(maxwell_lambda(0, 0)) < 1e-12);
  CHECK(std::abs(maxwell_lambda(0, 1)) < 1e-12);
  CHECK(std::abs(maxwell_lambda(1, 0)) < 1e-12);
  CHECK(maxwell_lambda(0, 2) == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(maxwell_lambda(1, 1) == doctest::Approx(-1.0 / 3).epsilon(1e-10));
  CHECK(maxwell_lambda(2, 0) == doctest::Approx(-1.0 / 3).epsilon(1e-10));
  CHECK(maxwell_min_nonzero() == doctest::Approx(1.0 / 3).epsilon(1e-10));
}

TEST_CASE("gap paths, null modes and sectors") {
  for (int p : {0, 1}) {
    Maxwell2d m(8, p);
    const SpectralResult ns = spectral_gap(m.G, m.cs, GapMethod::nullspace);
    const SpectralResult co = spectral_gap(m.G, m.cs, GapMethod::corrected);
    CHECK(ns.gap_exists);
    CHECK(ns.gap > 0.0);
    CHECK(co.zeros == 4);
    CHECK(co.diagnostic.empty());
    CHECK(co.gap == doctest::Approx(ns.gap).epsilon(1e-6));
    // the reduced problem excludes the invariants
    CHECK(ns.zeros == 0);

    const ReflectionSectors sym(m.mesh, m.basis, true);
    CHECK(sym.group_size() == 4);
    const SectoredProblem sp = project_sectors(m.G, sym, m.cs);
    CHECK(sp.sectors.size() == 4);
    const SpectralResult ss = sectored_gap(sp, GapMethod::nullspace);
    CHECK(ss.gap == doctest::Approx(ns.gap).epsilon(1e-9));
    const SpectralResult sc = sectored_gap(sp, GapMethod::corrected);
    CHECK(sc.zeros == 4);
    CHECK(sc.gap == doctest::Approx(ns.gap).epsilon(1e-6));
    const GradSettings gs;
    const GradAssembler ga(m.mesh, m.basis, m.params, make_nu_profile(m.params, m.mesh), gs);
    const SectoredProblem direct = assemble_sectors(ga, sym, m.cs, 1);
    CHECK(sectored_gap(direct, GapMethod::nullspace).gap == doctest::Approx(ns.gap).epsilon(1e-9));
  }
}

TEST_CASE("iterative path agrees with the dense path") {
  Maxwell2d m(10);
  EigenOptions it;
  it.mode = EigenMode::iterative;
  const double a = spectral_gap(m.G, m.cs, GapMethod::nullspace).gap;
  const double b = spectral_gap(m.G, m.cs, GapMethod::nullspace, it).gap;
  CHECK(b == doctest::Approx(a).epsilon(1e-8));
}

TEST_CASE("Rayleigh quotient is scale invariant") {
  Maxwell2d m(6);
  const double a = spectral_gap(m.G, m.cs, GapMethod::nullspace).gap;
  ReducedProblem prob{m.G.entries, m.cs.D.dense(), m.cs.C};
  ReducedProblem scaled{3.0 * prob.G, 3.0 * prob.D, 7.0 * prob.C};
  const auto e1 = problem_eigenvalues(prob, GapMethod::nullspace, {});
  const auto e2 = problem_eigenvalues(scaled, GapMethod::nullspace, {});
  REQUIRE(e1.size() == e2.size());
  for (std::size_t i = 0; i < 5; ++i) CHECK(e2[i] == doctest::Approx(e1[i]).epsilon(1e-10));
  CHECK(e1.front() == doctest::Approx(a).epsilon(1e-10));
}

TEST_CASE("mesh refinement trend on the Maxwell case") {
  double prev = 0.0;
  std::vector<double> diff;
  for (int N : {4, 8, 16}) {
    Maxwell2d m(N);
    const double g = spectral_gap(m.G, m.cs, GapMethod::nullspace).gap;
    if (prev != 0.0) diff.push_back(std::abs(g - prev));
    prev = g;
  }
  CHECK(diff[1] < diff[0]);
}

TEST_CASE("summarize spectrum") {
  const SpectralResult r = summarize_spectrum({-1e-14, 1e-15, 0.0, 2e-14, 0.3, 0.5}, GapMethod::corrected, 2, 1e-10);
  CHECK(r.zeros == 4);
  CHECK(r.gap == doctest::Approx(0.3));
  CHECK(r.gap_exists);
  CHECK(r.diagnostic.empty());
  const SpectralResult bad = summarize_spectrum({0.0, 0.0, 0.0, 0.3, 0.5}, GapMethod::corrected, 2, 1e-10);
  CHECK_FALSE(bad.diagnostic.empty());
}
