#include "boltzgap/spectra.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "boltzgap/error.hpp"
#include "boltzgap/quadrature.hpp"

namespace boltzgap {

const char* to_string(GapMethod m) { return m == GapMethod::nullspace ? "nullspace" : "corrected"; }

Eigen::VectorXd eig_sym(const Eigen::MatrixXd& A, const Eigen::MatrixXd* B) {
  require(A.rows() == A.cols(), ErrorCode::invalid_argument, "eig_sym needs a square matrix");
  if (!B) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    require(es.info() == Eigen::Success, ErrorCode::internal, "symmetric eigensolver failed");
    return es.eigenvalues();
  }
  require(B->rows() == A.rows() && B->cols() == A.cols(), ErrorCode::invalid_argument, "pencil size mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(*B);
  require(llt.info() == Eigen::Success, ErrorCode::not_positive_definite, "B is not positive definite");
  Eigen::MatrixXd C = llt.matrixL().solve(A);
  C = llt.matrixL().solve(C.transpose()).transpose();
  C = 0.5 * (C + C.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::internal, "symmetric eigensolver failed");
  return es.eigenvalues();
}

Eigen::VectorXd lanczos_smallest(const Eigen::MatrixXd& A, const Eigen::MatrixXd* B, int wanted, double tol,
                                 double shift) {
  const Eigen::Index n = A.rows();
  require(n > 0 && wanted > 0, ErrorCode::invalid_argument, "empty Lanczos problem");
  wanted = static_cast<int>(std::min<Eigen::Index>(wanted, n));
  Eigen::MatrixXd K = A;
  if (B)
    K -= shift * *B;
  else
    K.diagonal().array() -= shift;
  Eigen::LDLT<Eigen::MatrixXd> fact(K);
  require(fact.info() == Eigen::Success, ErrorCode::not_positive_definite, "shifted matrix factorization failed");
  auto bmul = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return B ? Eigen::VectorXd(*B * x) : x; };
  auto bdot = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return x.dot(bmul(y)); };

  const int max_steps = static_cast<int>(std::min<Eigen::Index>(n, std::max(3 * wanted + 40, 80)));
  Eigen::MatrixXd Q(n, max_steps + 1);
  std::vector<double> alpha, beta;
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = 1.0 + 0.25 * std::sin(1.0 + 0.7 * static_cast<double>(i));
  q /= std::sqrt(bdot(q, q));
  Q.col(0) = q;
  Eigen::VectorXd theta;
  int steps = 0;
  for (int j = 0; j < max_steps; ++j) {
    Eigen::VectorXd w = fact.solve(bmul(Q.col(j)));
    const double a = bdot(w, Q.col(j));
    alpha.push_back(a);
    w -= a * Q.col(j);
    if (j > 0) w -= beta.back() * Q.col(j - 1);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) w -= bdot(w, Q.col(i)) * Q.col(i);
    const double b = std::sqrt(std::max(0.0, bdot(w, w)));
    steps = j + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
    for (int i = 0; i < steps; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < steps) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    if (steps >= wanted || b < 1e-14 * std::abs(a)) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      theta = es.eigenvalues();
      bool converged = steps >= wanted;
      for (int i = 0; i < std::min(wanted, steps) && converged; ++i) {
        const Eigen::Index idx = steps - 1 - i;
        const double resid = std::abs(b * es.eigenvectors()(steps - 1, idx));
        converged = resid <= tol * std::abs(theta[idx]);
      }
      if (converged || b < 1e-14 * std::abs(a)) break;
    }
    beta.push_back(b);
    Q.col(j + 1) = w / b;
  }
  // largest theta <-> smallest lambda = shift + 1/theta
  std::vector<double> lambdas;
  for (Eigen::Index i = theta.size() - 1; i >= 0 && static_cast<int>(lambdas.size()) < wanted; --i)
    lambdas.push_back(shift + 1.0 / theta[i]);
  std::sort(lambdas.begin(), lambdas.end());
  return Eigen::Map<Eigen::VectorXd>(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
}

namespace {

// L^{-1} for block-diagonal D (contiguous diagonal blocks detected from the
// sparsity pattern), returned as a dense matrix with the same block pattern.
struct BlockCholesky {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;  // [start, end)
  std::vector<Eigen::MatrixXd> linv;

  explicit BlockCholesky(const Eigen::MatrixXd& D) {
    const Eigen::Index n = D.rows();
    Eigen::Index start = 0;
    while (start < n) {
      Eigen::Index end = start + 1;
      for (Eigen::Index i = start; i < end; ++i)
        for (Eigen::Index j = n - 1; j >= end; --j)
          if (D(i, j) != 0.0 || D(j, i) != 0.0) {
            end = j + 1;
            break;
          }
      Eigen::LLT<Eigen::MatrixXd> llt(D.block(start, start, end - start, end - start));
      require(llt.info() == Eigen::Success, ErrorCode::not_positive_definite, "mass matrix is not positive definite");
      const Eigen::MatrixXd L = llt.matrixL();
      linv.push_back(L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(end - start, end - start)));
      blocks.emplace_back(start, end);
      start = end;
    }
  }
  // returns L^{-1} X
  Eigen::MatrixXd left(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto [s, e] = blocks[b];
      out.middleRows(s, e - s) = linv[b] * X.middleRows(s, e - s);
    }
    return out;
  }
  // returns X L^{-T}
  Eigen::MatrixXd right(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto [s, e] = blocks[b];
      out.middleCols(s, e - s) = X.middleCols(s, e - s) * linv[b].transpose();
    }
    return out;
  }
};

Eigen::VectorXd solve_standard(const Eigen::MatrixXd& A, const EigenOptions& opt, double shift) {
  const bool iterative =
      opt.mode == EigenMode::iterative || (opt.mode == EigenMode::automatic && A.rows() > opt.dense_limit);
  if (iterative) return lanczos_smallest(A, nullptr, opt.wanted, opt.tol, shift);
  return eig_sym(A);
}

}  // namespace

Eigen::MatrixXd corrected_symmetric(const ReducedProblem& prob) {
  const BlockCholesky bc(prob.D);
  Eigen::MatrixXd Gt = bc.right(bc.left(prob.G));
  Gt = 0.5 * (Gt + Gt.transpose()).eval();
  if (prob.C.rows() == 0) return Gt;
  const Eigen::MatrixXd Y = bc.left(prob.C.transpose());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  const Eigen::Index M = Y.rows(), r = Y.cols();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(M, r);
  Q.applyOnTheLeft(qr.householderQ());
  // W Gt W with W = I - Q Q^T
  const Eigen::MatrixXd GQ = Gt * Q;
  const Eigen::MatrixXd QtGQ = Q.transpose() * GQ;
  Eigen::MatrixXd H = Gt - Q * GQ.transpose() - GQ * Q.transpose() + Q * QtGQ * Q.transpose();
  return 0.5 * (H + H.transpose());
}

std::vector<double> problem_eigenvalues(const ReducedProblem& prob, GapMethod method, const EigenOptions& opt) {
  const Eigen::Index M = prob.G.rows();
  require(prob.G.cols() == M && prob.D.rows() == M && prob.D.cols() == M && (prob.C.rows() == 0 || prob.C.cols() == M),
          ErrorCode::invalid_argument, "inconsistent reduced problem");
  const double scale = M ? prob.G.diagonal().cwiseAbs().maxCoeff() : 1.0;
  const double shift = -1e-3 * scale;
  Eigen::VectorXd ev;
  if (method == GapMethod::corrected) {
    ev = solve_standard(corrected_symmetric(prob), opt, shift);
  } else {
    const BlockCholesky bc(prob.D);
    Eigen::MatrixXd Gt = bc.right(bc.left(prob.G));
    Gt = 0.5 * (Gt + Gt.transpose()).eval();
    const Eigen::Index r = prob.C.rows();
    if (r == 0) {
      ev = solve_standard(Gt, opt, shift);
    } else {
      check_constraint_rank(prob.C);
      const Eigen::MatrixXd Ct = bc.left(prob.C.transpose());  // columns span L^{-1} C^T
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(Ct);
      Gt.applyOnTheLeft(qr.householderQ().adjoint());
      Gt.applyOnTheRight(qr.householderQ());
      Eigen::MatrixXd A = Gt.bottomRightCorner(M - r, M - r);
      A = 0.5 * (A + A.transpose()).eval();
      ev = solve_standard(A, opt, shift);
    }
  }
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

SpectralResult summarize_spectrum(std::vector<double> eigenvalues, GapMethod method, int d, double zero_tol) {
  SpectralResult res;
  std::sort(eigenvalues.begin(), eigenvalues.end());
  res.eigenvalues = std::move(eigenvalues);
  res.method = method;
  res.zero_tol = zero_tol;
  for (double l : res.eigenvalues)
    if (std::abs(l) < zero_tol) ++res.zeros;
  const std::size_t expected = method == GapMethod::corrected ? static_cast<std::size_t>(d + 2) : 0;
  if (static_cast<std::size_t>(res.zeros) != expected)
    res.diagnostic = "found " + std::to_string(res.zeros) + " null modes, expected " + std::to_string(expected);
  if (res.eigenvalues.size() > expected) {
    res.gap = res.eigenvalues[expected];
    res.gap_exists = res.gap > zero_tol;
  }
  return res;
}

SpectralResult spectral_gap(const CollisionMatrix& G, const ConstraintSet& cs, GapMethod method,
                            const EigenOptions& opt, double zero_tol_rel) {
  require(G.representation == cs.representation, ErrorCode::representation_mismatch,
          "collision matrix and constraints use different representations");
  const auto t0 = std::chrono::steady_clock::now();
  ReducedProblem prob{G.entries, cs.D.dense(), cs.C};
  SpectralResult res =
      summarize_spectrum(problem_eigenvalues(prob, method, opt), method, G.params.d, zero_tol_rel * G.norm());
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

namespace {
double legendre(int l, double x) {
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}
}  // namespace

double maxwell_lambda(int n, int l, const MaxwellEigenOracle& oracle) {
  require(n >= 0 && l >= 0, ErrorCode::invalid_argument, "indices must be nonnegative");
  const quad::Rule1D rule = quad::gauss_legendre(oracle.order, 0.0, std::numbers::pi);
  const int e = 2 * n + l;
  const double delta = (n == 0 && l == 0) ? 1.0 : 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double t = rule.nodes[i];
    const double c = std::cos(0.5 * t), s = std::sin(0.5 * t);
    const double f = std::pow(c, e) * legendre(l, c) + std::pow(s, e) * legendre(l, s) - 1.0 - delta;
    total += rule.weights[i] * std::sin(t) * f;
  }
  return 2.0 * std::numbers::pi * oracle.b * total;
}

double maxwell_min_nonzero(const MaxwellEigenOracle& oracle) {
  double best = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= oracle.max_index; ++n)
    for (int l = 0; l <= oracle.max_index; ++l) {
      const double lam = std::abs(maxwell_lambda(n, l, oracle));
      if (lam > 1e-12) best = std::min(best, lam);
    }
  return best;
}

}  // namespace boltzgap
