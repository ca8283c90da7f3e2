#include "boltzgap/mesh.hpp"

#include <cmath>

#include "boltzgap/error.hpp"
#include "boltzgap/kernels.hpp"
#include "boltzgap/quadrature.hpp"

namespace boltzgap {

void OperatorParams::validate() const {
  require(d == 2 || d == 3, ErrorCode::invalid_argument, "dimension must be 2 or 3");
  require(gamma > -d && gamma <= 1.0, ErrorCode::invalid_argument, "gamma must lie in (-d, 1]");
  require(alpha < 2.0, ErrorCode::invalid_argument, "alpha must be < 2");
  require(!b_normalized || alpha < 0.0, ErrorCode::invalid_argument,
          "b normalization requires an integrable cross-section (alpha < 0)");
}

OperatorParams make_params(int d, double gamma, double alpha) {
  OperatorParams p{d, gamma, alpha, alpha < 0.0};
  p.validate();
  return p;
}

const char* to_string(Representation r) { return r == Representation::F ? "F" : "g"; }

Mesh::Mesh(double V, int N, int d) : V_(V), N_(N), d_(d), dv_(0.0), cells_(0) {
  require(V > 0.0 && std::isfinite(V), ErrorCode::invalid_argument, "V must be positive");
  require(N >= 2, ErrorCode::invalid_argument, "N must be >= 2");
  require(d == 2 || d == 3, ErrorCode::invalid_argument, "dimension must be 2 or 3");
  dv_ = 2.0 * V / N;
  cells_ = d == 2 ? N * N : N * N * N;
}

double Mesh::volume() const { return d_ == 2 ? dv_ * dv_ : dv_ * dv_ * dv_; }

int Mesh::flat(const Index3& k) const { return d_ == 2 ? k[0] + N_ * k[1] : k[0] + N_ * (k[1] + N_ * k[2]); }

Index3 Mesh::multi(int f) const {
  Index3 k{0, 0, 0};
  k[0] = f % N_;
  f /= N_;
  k[1] = f % N_;
  if (d_ == 3) k[2] = f / N_;
  return k;
}

Point Mesh::center(const Index3& k) const {
  Point w{0, 0, 0};
  for (int i = 0; i < d_; ++i) w[i] = center(k[i]);
  return w;
}

int Mesh::axis_locate(double x) const {
  if (!(x >= -V_ && x < V_)) return -1;
  int k = static_cast<int>(std::floor((x + V_) / dv_));
  // guard the floor against round-off at element faces
  if (k >= N_) k = N_ - 1;
  if (k > 0 && x < lower(k)) --k;
  if (k < N_ - 1 && x >= upper(k)) ++k;
  return k;
}

std::optional<Index3> Mesh::locate(const Point& v) const {
  Index3 k{0, 0, 0};
  for (int i = 0; i < d_; ++i) {
    k[i] = axis_locate(v[i]);
    if (k[i] < 0) return std::nullopt;
  }
  return k;
}

Mesh build_mesh(double V, int N, int d) { return Mesh(V, N, d); }

BasisSpec make_basis(int p, int d) {
  require(p == 0 || p == 1, ErrorCode::invalid_argument, "basis degree must be 0 or 1");
  require(d == 2 || d == 3, ErrorCode::invalid_argument, "dimension must be 2 or 3");
  return BasisSpec{p, d};
}

double BlockDiagonal::operator()(int i, int j) const {
  const int bi = i / block, bj = j / block;
  if (bi != bj) return 0.0;
  return blocks[bi](i % block, j % block);
}

Eigen::MatrixXd BlockDiagonal::dense() const {
  const int n = size();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t b = 0; b < blocks.size(); ++b) D.block(b * block, b * block, block, block) = blocks[b];
  return D;
}

ElementRule element_rule(const Mesh& mesh, const Index3& k, int order) {
  const int d = mesh.d();
  std::array<quad::Rule1D, 3> axis;
  for (int i = 0; i < d; ++i) axis[i] = quad::gauss_legendre(order, mesh.lower(k[i]), mesh.upper(k[i]));
  ElementRule r;
  const double inv = 1.0 / mesh.volume();
  const int n3 = d == 3 ? order : 1;
  for (int c = 0; c < n3; ++c)
    for (int b = 0; b < order; ++b)
      for (int a = 0; a < order; ++a) {
        Point v{axis[0].nodes[a], axis[1].nodes[b], d == 3 ? axis[2].nodes[c] : 0.0};
        double w = axis[0].weights[a] * axis[1].weights[b] * (d == 3 ? axis[2].weights[c] : 1.0);
        r.nodes.push_back(v);
        r.weights.push_back(w * inv);
      }
  return r;
}

BlockDiagonal mass_matrix(const Mesh& mesh, const BasisSpec& basis, Representation rep) {
  const int nl = basis.n_local();
  BlockDiagonal D;
  D.block = nl;
  D.blocks.resize(mesh.cells());
  for (int c = 0; c < mesh.cells(); ++c) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nl, nl);
    if (rep == Representation::F) {
      for (int l = 0; l < nl; ++l) B(l, l) = basis_norm2(l);
    } else {
      const Index3 k = mesh.multi(c);
      const Point w = mesh.center(k);
      const ElementRule er = element_rule(mesh, k, 6);
      for (std::size_t q = 0; q < er.nodes.size(); ++q) {
        const double mw = er.weights[q] * maxwellian(er.nodes[q], mesh.d());
        for (int a = 0; a < nl; ++a)
          for (int b = 0; b < nl; ++b)
            B(a, b) += mw * basis_value(a, er.nodes[q], w, mesh.dv()) * basis_value(b, er.nodes[q], w, mesh.dv());
      }
    }
    D.blocks[c] = B;
  }
  return D;
}

CoefficientVector l2_project(const ScalarField& f, const Mesh& mesh, const BasisSpec& basis, Representation rep) {
  const int nl = basis.n_local();
  CoefficientVector out;
  out.representation = rep;
  out.values = Eigen::VectorXd::Zero(basis_size(mesh, basis));
  for (int c = 0; c < mesh.cells(); ++c) {
    const Index3 k = mesh.multi(c);
    const Point w = mesh.center(k);
    const ElementRule er = element_rule(mesh, k, 6);
    for (std::size_t q = 0; q < er.nodes.size(); ++q) {
      const double fv = f(er.nodes[q]) * er.weights[q];
      for (int l = 0; l < nl; ++l) out.values[global_index(c, l, basis)] += fv * basis_value(l, er.nodes[q], w, mesh.dv());
    }
    for (int l = 0; l < nl; ++l) out.values[global_index(c, l, basis)] /= basis_norm2(l);
  }
  return out;
}

}  // namespace boltzgap
