#pragma once

// Symmetric (generalized) eigensolves, spectral-gap extraction and the
// Maxwell-molecule eigenvalue oracle.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "boltzgap/collision_matrix.hpp"
#include "boltzgap/constraints.hpp"

namespace boltzgap {

enum class GapMethod : int { nullspace = 0, corrected = 1 };
const char* to_string(GapMethod m);

enum class EigenMode : int { dense = 0, iterative = 1, automatic = 2 };

struct EigenOptions {
  EigenMode mode = EigenMode::automatic;
  int dense_limit = 14000;  // automatic switches to iterative above this size
  int wanted = 12;          // eigenvalues requested in iterative mode
  double tol = 1e-8;
};

struct SpectralResult {
  std::vector<double> eigenvalues;  // ascending
  double zero_tol = 0.0;
  int zeros = 0;
  double gap = 0.0;
  bool gap_exists = false;
  GapMethod method = GapMethod::nullspace;
  double seconds = 0.0;
  std::string diagnostic;  // nonempty when the null-mode count is inconsistent
};

/// All eigenvalues of the pencil (A, B) ascending; B = nullptr means identity.
Eigen::VectorXd eig_sym(const Eigen::MatrixXd& A, const Eigen::MatrixXd* B = nullptr);

/// Smallest `wanted` eigenvalues of (A, B) by shift-invert Lanczos with full
/// reorthogonalization in the B inner product.
Eigen::VectorXd lanczos_smallest(const Eigen::MatrixXd& A, const Eigen::MatrixXd* B, int wanted, double tol,
                                 double shift = 0.0);

/// One symmetric problem: min x^T G x / x^T D x subject to C x = 0.
struct ReducedProblem {
  Eigen::MatrixXd G, D, C;
};

/// Ascending eigenvalues of one problem by the chosen path; the corrected path
/// includes the C.rows() constrained null modes.
std::vector<double> problem_eigenvalues(const ReducedProblem& prob, GapMethod method, const EigenOptions& opt);

/// Combines eigenvalue lists (e.g. from symmetry sectors) into a result.
SpectralResult summarize_spectrum(std::vector<double> eigenvalues, GapMethod method, int d, double zero_tol);

SpectralResult spectral_gap(const CollisionMatrix& G, const ConstraintSet& cs, GapMethod method,
                            const EigenOptions& opt = {}, double zero_tol_rel = 1e-8);

/// Symmetrized corrected operator W L^{-1} G L^{-T} W with D = L L^T and W the
/// orthogonal projector onto the complement of L^{-1} C^T.
Eigen::MatrixXd corrected_symmetric(const ReducedProblem& prob);

struct MaxwellEigenOracle {
  double b = 1.0 / (4.0 * 3.14159265358979323846);
  int order = 96;
  int max_index = 8;
};

/// lambda_nl = int_{S^2} b [cos^{2n+l}(t/2) P_l(cos(t/2)) + sin^{2n+l}(t/2) P_l(sin(t/2)) - 1 - delta] dsigma.
double maxwell_lambda(int n, int l, const MaxwellEigenOracle& oracle = {});
/// Minimum |lambda_nl| over nonzero modes with n, l <= max_index.
double maxwell_min_nonzero(const MaxwellEigenOracle& oracle = {});

}  // namespace boltzgap
