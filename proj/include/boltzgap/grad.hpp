#pragma once

// Grad-splitting kernels k1, k2 and the F-representation assembly
//   G(k,m) = delta_km int nu Phi Phi + int int (k1 - k2) Phi(v) Phi(xi).

#include <array>
#include <memory>
#include <vector>

#include "boltzgap/collision_matrix.hpp"
#include "boltzgap/kernels.hpp"
#include "boltzgap/mesh.hpp"

namespace boltzgap {

/// Tensor Gauss-Hermite rule on the plane orthogonal to xi - v.
struct PlanarQuadrature {
  int order = 32;
  /// Use the closed form when the plane integrand is constant (gamma + 1 + alpha = 0).
  bool closed_form = true;
};

/// Orthonormal basis of the plane orthogonal to n (d-1 vectors): start from the
/// coordinate axis least aligned with n and orthogonalize.
std::array<Point, 2> plane_basis(const Point& n, int d);

/// Component of (xi+v)/2 orthogonal to xi - v, and the parallel remainder.
Point zeta(const Point& v, const Point& xi, int d);
Point zeta_perp(const Point& v, const Point& xi, int d);

double kernel_k1(const Point& v, const Point& xi, const OperatorParams& params);
double kernel_k2(const Point& v, const Point& xi, const OperatorParams& params, const PlanarQuadrature& quad = {});

/// Exponent (gamma + 1 + alpha)/2 of the plane integrand.
inline double plane_exponent(const OperatorParams& p) { return 0.5 * (p.gamma + 1.0 + p.alpha); }

/// I(s, rho) = int_Pi exp(-|w + zeta|^2/2) (s^2 + |w|^2)^beta dw with |zeta| = rho,
/// by adaptive quadrature of its radial (d=3) or line (d=2) reduction.
double plane_integral(int d, double beta, double s, double rho);

/// Same integral by the tensor Gauss-Hermite rule of PlanarQuadrature.
double plane_integral_hermite(int d, double beta, double s, const Point& zeta_vec, const std::array<Point, 2>& basis,
                              int order);

/// log I(s, rho) on a grid uniform in log s and rho, cubic in both directions.
class PlaneIntegralTable {
 public:
  PlaneIntegralTable(int d, double beta, double s_min, double s_max, double rho_max, int threads = 1);
  double operator()(double s, double rho) const;

 private:
  int d_;
  double beta_;
  double ls_min_, ls_max_, rho_max_;
  double hs_, hr_;
  int ns_, nr_;
  std::vector<double> log_values_;  // (ns_ + 2) x (nr_ + 2), one ghost layer each side in log s
};

/// k = k1 - k2 with the plane integral served from a table.
class KernelEvaluator {
 public:
  KernelEvaluator(const OperatorParams& params, double s_max, double rho_max, int threads = 1, bool use_table = true);

  double k1(double vv, double xx, double s) const;
  double k2(double s, double q, double rho) const;
  /// k1 - k2 at (v, xi), xi != v.
  double operator()(const Point& v, const Point& xi) const;

  const OperatorParams& params() const { return params_; }

 private:
  OperatorParams params_;
  int d_;
  double beta_;
  double c1_, c2_;
  double plane_const_ = 0.0;
  std::unique_ptr<PlaneIntegralTable> table_;
};

/// Rule for the singular near-diagonal kernel blocks. exact: relative-coordinate
/// Duffy rule over neighbouring blocks. offset: plain tensor Gauss everywhere, with
/// the xi factor of the diagonal block at one order higher so nodes never coincide.
enum class NearRule : int { exact = 0, offset = 1 };

struct GradSettings {
  NearRule near_rule = NearRule::exact;
  /// g expands F / mu^{1/2}: the basis functions become mu^{1/2} phi_l.
  Representation representation = Representation::F;
  int kernel_order = 3;  // far blocks, per axis per element
  int nu_order = 4;      // collision-frequency term, per axis
  int near_order = 4;    // relative-coordinate rule for neighbouring blocks
  int plane_order = 32;  // Gauss-Hermite order for the tabulated plane integral checks
  bool use_table = true;
  int threads = 1;
  double memory_budget = default_memory_budget;
};

class GradAssembler final : public RowAssembler {
 public:
  GradAssembler(const Mesh& mesh, const BasisSpec& basis, const OperatorParams& params, const NuProfile& nu,
                const GradSettings& settings);
  ~GradAssembler() override;

  const Mesh& mesh() const override { return mesh_; }
  const BasisSpec& basis() const override { return basis_; }
  const OperatorParams& params() const override { return params_; }
  Representation representation() const override { return settings_.representation; }
  Backend backend() const override { return Backend::grad; }
  void row_strip(int cell, Eigen::Ref<Eigen::MatrixXd> strip, AssemblyDiagnostics& diag) const override;

  const KernelEvaluator& kernel() const { return *kernel_; }

 private:
  struct CellNodes;
  void near_block(const Index3& k, const Index3& m, Eigen::Ref<Eigen::MatrixXd> block, AssemblyDiagnostics& diag) const;
  double phi(int l, const Point& v, const Point& w) const;
  void offset_block(const Index3& k, Eigen::Ref<Eigen::MatrixXd> block, AssemblyDiagnostics& diag) const;

  Mesh mesh_;
  BasisSpec basis_;
  OperatorParams params_;
  const NuProfile& nu_;
  GradSettings settings_;
  std::unique_ptr<KernelEvaluator> kernel_;
  std::vector<CellNodes> nodes_;
};

/// Dense F-representation collision matrix.
CollisionMatrix assemble_grad(const Mesh& mesh, const BasisSpec& basis, const OperatorParams& params,
                              const NuProfile& nu, const GradSettings& settings = {});

}  // namespace boltzgap
