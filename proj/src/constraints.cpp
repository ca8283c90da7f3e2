#include "boltzgap/constraints.hpp"

#include <cmath>

#include "boltzgap/error.hpp"
#include "boltzgap/kernels.hpp"

namespace boltzgap {

ConstraintSet constraint_matrix(const Mesh& mesh, const BasisSpec& basis, Representation rep) {
  const int d = mesh.d();
  const int nl = basis.n_local();
  ConstraintSet cs;
  cs.representation = rep;
  cs.D = mass_matrix(mesh, basis, rep);
  cs.C = Eigen::MatrixXd::Zero(d + 2, basis_size(mesh, basis));
  for (int c = 0; c < mesh.cells(); ++c) {
    const Index3 k = mesh.multi(c);
    const Point w = mesh.center(k);
    const ElementRule er = element_rule(mesh, k, 6);
    for (std::size_t q = 0; q < er.nodes.size(); ++q) {
      const Point& v = er.nodes[q];
      const double mu = maxwellian(v, d);
      const double weight = er.weights[q] * (rep == Representation::F ? std::sqrt(mu) : mu);
      double moments[5];
      moments[0] = 1.0;
      for (int i = 0; i < d; ++i) moments[1 + i] = v[i];
      moments[d + 1] = norm2(v, d);
      for (int l = 0; l < nl; ++l) {
        const double phi = basis_value(l, v, w, mesh.dv());
        for (int r = 0; r < d + 2; ++r) cs.C(r, global_index(c, l, basis)) += weight * moments[r] * phi;
      }
    }
  }
  return cs;
}

void check_constraint_rank(const Eigen::MatrixXd& C) {
  if (C.rows() == 0) return;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(C.transpose());
  const Eigen::VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
  const double tol = 1e-12 * diag.maxCoeff();
  for (Eigen::Index i = 0; i < diag.size(); ++i)
    require(diag[i] > tol, ErrorCode::rank_deficient, "constraint matrix is rank deficient");
}

Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& C) {
  const Eigen::Index M = C.cols(), r = C.rows();
  require(r < M, ErrorCode::rank_deficient, "more constraints than unknowns");
  if (r == 0) return Eigen::MatrixXd::Identity(M, M);
  check_constraint_rank(C);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C.transpose());
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(M, M);
  Q.applyOnTheLeft(qr.householderQ());
  return Q.rightCols(M - r);
}

Eigen::MatrixXd nullspace_basis(const ConstraintSet& cs) { return nullspace_basis(cs.C); }

Eigen::MatrixXd conservation_projector(const Eigen::MatrixXd& C, const Eigen::MatrixXd& D) {
  const Eigen::Index M = C.cols();
  Eigen::LLT<Eigen::MatrixXd> dl(D);
  require(dl.info() == Eigen::Success, ErrorCode::not_positive_definite, "mass matrix is not positive definite");
  const Eigen::MatrixXd DinvCt = dl.solve(C.transpose());
  const Eigen::MatrixXd S = C * DinvCt;
  Eigen::LLT<Eigen::MatrixXd> sl(S);
  require(sl.info() == Eigen::Success, ErrorCode::ill_conditioned, "C D^-1 C^T is not positive definite");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  require(cond <= 1e12, ErrorCode::ill_conditioned,
          "C D^-1 C^T is ill-conditioned (condition estimate " + std::to_string(cond) + ")");
  return Eigen::MatrixXd::Identity(M, M) - DinvCt * sl.solve(C);
}

Eigen::MatrixXd conservation_correct(const CollisionMatrix& G, const ConstraintSet& cs) {
  require(G.representation == cs.representation, ErrorCode::representation_mismatch,
          "collision matrix and constraints use different representations");
  require(G.size() == cs.C.cols(), ErrorCode::invalid_argument, "dimension mismatch");
  return conservation_projector(cs.C, cs.D.dense()) * G.entries;
}

}  // namespace boltzgap
