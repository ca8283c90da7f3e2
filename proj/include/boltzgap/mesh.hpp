#pragma once

// Velocity domain [-V, V)^d, uniform Cartesian elements and the local
// orthogonal P0/P1 basis.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace boltzgap {

using Point = std::array<double, 3>;
using Index3 = std::array<int, 3>;

struct OperatorParams {
  int d = 2;
  double gamma = 0.0;
  double alpha = -1.0;
  bool b_normalized = true;

  /// Throws Error(invalid_argument) when d, gamma, alpha or the flag are out of range.
  void validate() const;
  bool integrable() const { return alpha < 0.0; }
};

/// Default normalization flag: on for integrable cross-sections, off otherwise.
OperatorParams make_params(int d, double gamma, double alpha);

enum class Representation : int { F = 0, g = 1 };
const char* to_string(Representation r);

class Mesh {
 public:
  Mesh(double V, int N, int d);

  double V() const { return V_; }
  int N() const { return N_; }
  int d() const { return d_; }
  double dv() const { return dv_; }
  double volume() const;  // |E| = dv^d
  int cells() const { return cells_; }

  double center(int ki) const { return -V_ + (ki + 0.5) * dv_; }
  double lower(int ki) const { return -V_ + ki * dv_; }
  double upper(int ki) const { return -V_ + (ki + 1) * dv_; }

  int flat(const Index3& k) const;
  Index3 multi(int flat_index) const;
  Point center(const Index3& k) const;

  /// Axis index of coordinate x under the half-open convention, or -1 outside [-V, V).
  int axis_locate(double x) const;
  std::optional<Index3> locate(const Point& v) const;

 private:
  double V_;
  int N_;
  int d_;
  double dv_;
  int cells_;
};

Mesh build_mesh(double V, int N, int d);

struct BasisSpec {
  int p = 0;
  int d = 2;
  int n_local() const { return p == 0 ? 1 : d + 1; }
};

BasisSpec make_basis(int p, int d);

/// Value of local function l of element with center w at v.
inline double basis_value(int l, const Point& v, const Point& w, double dv) {
  return l == 0 ? 1.0 : (v[l - 1] - w[l - 1]) / dv;
}

/// (1/|E|) * integral over the element of phi_l^2.
inline double basis_norm2(int l) { return l == 0 ? 1.0 : 1.0 / 12.0; }

struct CoefficientVector {
  Eigen::VectorXd values;
  Representation representation = Representation::F;
};

/// Element-major, local-minor global index.
inline int global_index(int cell, int l, const BasisSpec& b) { return cell * b.n_local() + l; }
inline int basis_size(const Mesh& m, const BasisSpec& b) { return m.cells() * b.n_local(); }

/// Block diagonal matrix with one n_local x n_local block per element.
struct BlockDiagonal {
  int block = 1;
  std::vector<Eigen::MatrixXd> blocks;

  int size() const { return block * static_cast<int>(blocks.size()); }
  double operator()(int i, int j) const;
  Eigen::MatrixXd dense() const;
};

BlockDiagonal mass_matrix(const Mesh& mesh, const BasisSpec& basis, Representation rep);

using ScalarField = std::function<double(const Point&)>;

/// Element-wise L2 projection, exact for polynomials of degree <= p per element.
CoefficientVector l2_project(const ScalarField& f, const Mesh& mesh, const BasisSpec& basis,
                             Representation rep = Representation::F);

/// Tensor Gauss rule over element k (order per axis), weights scaled by 1/|E|.
struct ElementRule {
  std::vector<Point> nodes;
  std::vector<double> weights;
};
ElementRule element_rule(const Mesh& mesh, const Index3& k, int order);

}  // namespace boltzgap
