#pragma once

// Collision-invariant constraints C u = 0, the QR null-space basis and the
// Lagrange-multiplier correction G_c = [I - D^{-1} C^T (C D^{-1} C^T)^{-1} C] G.

#include <Eigen/Dense>

#include "boltzgap/collision_matrix.hpp"
#include "boltzgap/mesh.hpp"

namespace boltzgap {

struct ConstraintSet {
  Eigen::MatrixXd C;  // (d+2) x M: mass, momentum_1..d, energy
  BlockDiagonal D;
  Representation representation = Representation::F;
};

ConstraintSet constraint_matrix(const Mesh& mesh, const BasisSpec& basis, Representation rep);

/// Orthonormal basis of null(C) from the QR factorization of C^T (last M - r columns).
Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& C);
Eigen::MatrixXd nullspace_basis(const ConstraintSet& cs);

/// Pi_D = I - D^{-1} C^T (C D^{-1} C^T)^{-1} C.
Eigen::MatrixXd conservation_projector(const Eigen::MatrixXd& C, const Eigen::MatrixXd& D);
Eigen::MatrixXd conservation_correct(const CollisionMatrix& G, const ConstraintSet& cs);

/// Throws rank_deficient when the rows of C are numerically dependent.
void check_constraint_rank(const Eigen::MatrixXd& C);

}  // namespace boltzgap
