#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "boltzgap/mesh.hpp"

namespace boltzgap {

enum class Backend : int { grad = 0, direct = 1 };
const char* to_string(Backend b);

struct AssemblyDiagnostics {
  std::int64_t kernel_evaluations = 0;
  std::int64_t pruned_pairs = 0;
  std::int64_t angular_integrals = 0;
  std::int64_t angular_failures = 0;
  double max_angular_error = 0.0;
  double max_asymmetry = 0.0;  // max |G - G^T| before symmetrization

  void merge(const AssemblyDiagnostics& o);
};

struct CollisionMatrix {
  Eigen::MatrixXd entries;
  Representation representation = Representation::F;
  Backend backend = Backend::grad;
  OperatorParams params;
  double V = 0.0;
  int N = 0;
  int p = 0;
  AssemblyDiagnostics diagnostics;

  int size() const { return static_cast<int>(entries.rows()); }
  /// max |diag G|, the scale used for zero tolerances.
  double norm() const;
};

/// Source of unsymmetrized matrix rows, one element strip at a time.
class RowAssembler {
 public:
  virtual ~RowAssembler() = default;
  virtual const Mesh& mesh() const = 0;
  virtual const BasisSpec& basis() const = 0;
  virtual const OperatorParams& params() const = 0;
  virtual Representation representation() const = 0;
  virtual Backend backend() const = 0;
  /// Writes the n_local x M rows of element `cell` into strip (pre-sized, zeroed).
  virtual void row_strip(int cell, Eigen::Ref<Eigen::MatrixXd> strip, AssemblyDiagnostics& diag) const = 0;
};

/// Assembles every strip in parallel and symmetrizes. Throws memory_budget if
/// the dense matrix would exceed budget_bytes.
CollisionMatrix assemble_full(const RowAssembler& asmb, int threads, double budget_bytes);

double quadratic_form(const CollisionMatrix& G, const CoefficientVector& x);

/// Binary dump: 32-byte header (magic "BGAP", version, d, N, p,
/// representation, backend, M) then row-major little-endian float64.
void write_matrix_dump(const std::string& path, const CollisionMatrix& G);
CollisionMatrix read_matrix_dump(const std::string& path);

inline constexpr double default_memory_budget = 3.0e9;

}  // namespace boltzgap
