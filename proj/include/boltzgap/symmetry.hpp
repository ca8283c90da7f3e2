#pragma once

// Block diagonalization by the axis reflections v_i -> -v_i of the cube.
// The collision matrix commutes with each reflection, so it splits into 2^d
// parity sectors; only the rows of one representative element per orbit are
// ever assembled.

#include <utility>
#include <vector>

#include "boltzgap/collision_matrix.hpp"
#include "boltzgap/constraints.hpp"
#include "boltzgap/spectra.hpp"

namespace boltzgap {

class ReflectionSectors {
 public:
  struct Function {
    int cell;          // representative element
    int local;         // local basis index
    double row_scale;  // |group| / unnormalized norm
    std::vector<std::pair<int, double>> vec;  // normalized sector vector (global index, coefficient)
  };

  /// enabled = false gives the trivial decomposition (one sector, unit vectors).
  ReflectionSectors(const Mesh& mesh, const BasisSpec& basis, bool enabled);

  int group_size() const { return group_; }
  int sectors() const { return static_cast<int>(functions_.size()); }
  const std::vector<int>& rep_cells() const { return rep_cells_; }
  const std::vector<Function>& functions(int sector) const { return functions_[sector]; }
  /// Positions (sector, row) of the functions of representative cell index i.
  const std::vector<std::pair<int, int>>& rows_of(int rep_index) const { return rows_[rep_index]; }

 private:
  int group_ = 1;
  std::vector<int> rep_cells_;
  std::vector<std::vector<Function>> functions_;
  std::vector<std::vector<std::pair<int, int>>> rows_;
};

struct SectoredProblem {
  std::vector<ReducedProblem> sectors;
  double g_norm = 0.0;  // max |diag G| of the full matrix
  int d = 2;
  AssemblyDiagnostics diagnostics;
};

/// Assembles the sector blocks of G, D and C. Constraint rows that vanish in a
/// sector are dropped there.
SectoredProblem assemble_sectors(const RowAssembler& asmb, const ReflectionSectors& sym, const ConstraintSet& cs,
                                 int threads);

/// Projects an already assembled dense problem onto the sectors (tests, dumps).
SectoredProblem project_sectors(const CollisionMatrix& G, const ReflectionSectors& sym, const ConstraintSet& cs);

SpectralResult sectored_gap(const SectoredProblem& prob, GapMethod method, const EigenOptions& opt = {},
                            double zero_tol_rel = 1e-8);

}  // namespace boltzgap
