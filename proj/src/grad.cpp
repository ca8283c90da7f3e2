#include "boltzgap/grad.hpp"

#include <algorithm>
#include <cmath>

#include "boltzgap/error.hpp"
#include "boltzgap/parallel.hpp"
#include "boltzgap/quadrature.hpp"
#include "special.hpp"

namespace boltzgap {

namespace {

constexpr double pi = std::numbers::pi;

double dot(const Point& a, const Point& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

// s^e for the exponents that occur in practice, pow otherwise.
inline double power(double s, double e) {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return s;
  if (e == -1.0) return 1.0 / s;
  return std::pow(s, e);
}

}  // namespace

std::array<Point, 2> plane_basis(const Point& n_in, int d) {
  const double nn = std::sqrt(norm2(n_in, d));
  require(nn > 0.0, ErrorCode::invalid_argument, "plane normal must be nonzero");
  Point n{};
  for (int i = 0; i < d; ++i) n[i] = n_in[i] / nn;
  int axis = 0;
  for (int i = 1; i < d; ++i)
    if (std::abs(n[i]) < std::abs(n[axis])) axis = i;
  Point e1{};
  e1[axis] = 1.0;
  const double c = n[axis];
  for (int i = 0; i < d; ++i) e1[i] -= c * n[i];
  const double l1 = std::sqrt(norm2(e1, d));
  for (int i = 0; i < d; ++i) e1[i] /= l1;
  Point e2{};
  if (d == 3) {
    e2 = {n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2], n[0] * e1[1] - n[1] * e1[0]};
  }
  return {e1, e2};
}

Point zeta_perp(const Point& v, const Point& xi, int d) {
  Point diff{}, out{};
  for (int i = 0; i < d; ++i) diff[i] = xi[i] - v[i];
  const double s2 = norm2(diff, d);
  require(s2 > 0.0, ErrorCode::invalid_argument, "zeta requires xi != v");
  const double c = 0.5 * (norm2(xi, d) - norm2(v, d)) / s2;
  for (int i = 0; i < d; ++i) out[i] = c * diff[i];
  return out;
}

Point zeta(const Point& v, const Point& xi, int d) {
  const Point p = zeta_perp(v, xi, d);
  Point out{};
  for (int i = 0; i < d; ++i) out[i] = 0.5 * (xi[i] + v[i]) - p[i];
  return out;
}

double kernel_k1(const Point& v, const Point& xi, const OperatorParams& params) {
  require(params.integrable(), ErrorCode::not_applicable, "k1 requires an integrable cross-section (alpha < 0)");
  const int d = params.d;
  Point diff{};
  for (int i = 0; i < d; ++i) diff[i] = xi[i] - v[i];
  const double s = std::sqrt(norm2(diff, d));
  require(s > 0.0 || params.gamma >= 0.0, ErrorCode::singular_evaluation, "k1 is singular at v = xi for gamma < 0");
  const double Sb = make_cross_section(params).sphere_integral();
  return Sb * std::pow(2.0 * pi, -0.5 * d) * std::exp(-0.25 * (norm2(v, d) + norm2(xi, d))) * power(s, params.gamma);
}

double plane_integral(int d, double beta, double s, double rho) {
  if (beta == 0.0) return std::pow(2.0 * pi, 0.5 * (d - 1));
  quad::AdaptiveOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-15 * std::pow(2.0 * pi, 0.5 * (d - 1)) * std::pow(s * s + rho * rho + 1.0, beta);
  std::vector<double> breaks;
  if (d == 2) {
    const double lo = rho - 14.0, hi = rho + 14.0;
    breaks = {lo, hi, rho};
    for (double b : {0.0, -s, s, -10.0 * s, 10.0 * s})
      if (b > lo && b < hi) breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    auto f = [&](double t) { return std::exp(-0.5 * (t - rho) * (t - rho)) * std::pow(s * s + t * t, beta); };
    return quad::integrate_panels(f, breaks, opt).value;
  }
  const double lo = std::max(0.0, rho - 14.0), hi = rho + 14.0;
  breaks = {lo, hi};
  for (double b : {rho, s, 10.0 * s})
    if (b > lo && b < hi) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  auto f = [&](double r) {
    return 2.0 * pi * r * std::pow(s * s + r * r, beta) * std::exp(-0.5 * (r - rho) * (r - rho)) *
           detail::bessel_i0e(r * rho);
  };
  return quad::integrate_panels(f, breaks, opt).value;
}

double plane_integral_hermite(int d, double beta, double s, const Point& zeta_vec, const std::array<Point, 2>& basis,
                              int order) {
  const quad::Rule1D& gh = quad::gauss_hermite_prob(order);
  const double z1 = dot(zeta_vec, basis[0], d);
  double total = 0.0;
  if (d == 2) {
    for (std::size_t a = 0; a < gh.size(); ++a) {
      const double w = gh.nodes[a] - z1;
      total += gh.weights[a] * std::pow(s * s + w * w, beta);
    }
    return total;
  }
  const double z2 = dot(zeta_vec, basis[1], d);
  for (std::size_t a = 0; a < gh.size(); ++a)
    for (std::size_t b = 0; b < gh.size(); ++b) {
      const double w1 = gh.nodes[a] - z1, w2 = gh.nodes[b] - z2;
      total += gh.weights[a] * gh.weights[b] * std::pow(s * s + w1 * w1 + w2 * w2, beta);
    }
  return total;
}

double kernel_k2(const Point& v, const Point& xi, const OperatorParams& params, const PlanarQuadrature& quad) {
  require(params.integrable(), ErrorCode::not_applicable, "k2 requires an integrable cross-section (alpha < 0)");
  const int d = params.d;
  Point diff{};
  for (int i = 0; i < d; ++i) diff[i] = xi[i] - v[i];
  const double s2 = norm2(diff, d);
  require(s2 > 0.0, ErrorCode::singular_evaluation, "k2 is evaluated only for xi != v");
  const double s = std::sqrt(s2);
  const CrossSection cs = make_cross_section(params);
  const double c2 = std::pow(2.0, d) * cs.amplitude * std::pow(2.0 * pi, -0.5 * d);
  const double q = (norm2(xi, d) - norm2(v, d)) / s;
  const double pre = c2 * std::pow(s, -d - params.alpha) * std::exp(-s2 / 8.0 - q * q / 8.0);
  const double beta = plane_exponent(params);
  double I;
  if (beta == 0.0 && quad.closed_form) {
    I = std::pow(2.0 * pi, 0.5 * (d - 1));
  } else {
    I = plane_integral_hermite(d, beta, s, zeta(v, xi, d), plane_basis(diff, d), quad.order);
  }
  return pre * I;
}

PlaneIntegralTable::PlaneIntegralTable(int d, double beta, double s_min, double s_max, double rho_max, int threads)
    : d_(d), beta_(beta), ls_min_(std::log(s_min)), ls_max_(std::log(s_max)), rho_max_(rho_max) {
  require(s_min > 0.0 && s_max > s_min && rho_max > 0.0, ErrorCode::invalid_argument, "bad plane table range");
  ns_ = std::max(8, static_cast<int>(std::ceil((ls_max_ - ls_min_) / 0.01)));
  nr_ = std::max(8, static_cast<int>(std::ceil(rho_max / 0.025)));
  hs_ = (ls_max_ - ls_min_) / ns_;
  hr_ = rho_max_ / nr_;
  // rows j = 0..ns_+2 hold log s = ls_min + (j-1) hs; columns i = 0..nr_+2 hold rho = (i-1) hr
  const int rows = ns_ + 3, cols = nr_ + 3;
  log_values_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  parallel_for(rows, resolve_threads(threads), [&](int j) {
    const double s = std::exp(ls_min_ + (j - 1) * hs_);
    for (int i = 0; i < cols; ++i) {
      const double rho = std::abs((i - 1) * hr_);
      log_values_[static_cast<std::size_t>(j) * cols + i] = std::log(plane_integral(d_, beta_, s, rho));
    }
  });
}

double PlaneIntegralTable::operator()(double s, double rho) const {
  const double ls = std::log(s);
  if (ls < ls_min_ || ls > ls_max_ || rho > rho_max_) return plane_integral(d_, beta_, s, rho);
  const int cols = nr_ + 3;
  const double x = (ls - ls_min_) / hs_;
  const double y = rho / hr_;
  const int j0 = std::clamp(static_cast<int>(x), 0, ns_ - 1);
  const int i0 = std::clamp(static_cast<int>(y), 0, nr_ - 1);
  // local coordinates in [1, 2) of the 4-point stencils starting at j0 and i0
  const double sx = x - (j0 - 1), sy = y - (i0 - 1);
  auto lagrange = [](double t, double* l) {
    l[0] = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    l[1] = t * (t - 2) * (t - 3) / 2.0;
    l[2] = -t * (t - 1) * (t - 3) / 2.0;
    l[3] = t * (t - 1) * (t - 2) / 6.0;
  };
  double lx[4], ly[4];
  lagrange(sx, lx);
  lagrange(sy, ly);
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    const double* row = &log_values_[static_cast<std::size_t>(j0 + a) * cols + i0];
    acc += lx[a] * (ly[0] * row[0] + ly[1] * row[1] + ly[2] * row[2] + ly[3] * row[3]);
  }
  return std::exp(acc);
}

KernelEvaluator::KernelEvaluator(const OperatorParams& params, double s_max, double rho_max, int threads,
                                 bool use_table)
    : params_(params), d_(params.d), beta_(plane_exponent(params)) {
  require(params.integrable(), ErrorCode::not_applicable, "Grad splitting requires alpha < 0");
  const CrossSection cs = make_cross_section(params);
  c1_ = cs.sphere_integral() * std::pow(2.0 * pi, -0.5 * d_);
  c2_ = std::pow(2.0, d_) * cs.amplitude * std::pow(2.0 * pi, -0.5 * d_);
  if (beta_ == 0.0)
    plane_const_ = std::pow(2.0 * pi, 0.5 * (d_ - 1));
  else if (use_table)
    table_ = std::make_unique<PlaneIntegralTable>(d_, beta_, 1e-3, s_max, rho_max, threads);
}

double KernelEvaluator::k1(double vv, double xx, double s) const {
  return c1_ * std::exp(-0.25 * (vv + xx)) * power(s, params_.gamma);
}

double KernelEvaluator::k2(double s, double q, double rho) const {
  double I = plane_const_;
  if (beta_ != 0.0) I = table_ ? (*table_)(s, rho) : plane_integral(d_, beta_, s, rho);
  return c2_ * power(s, -d_ - params_.alpha) * std::exp(-0.125 * (s * s + q * q)) * I;
}

double KernelEvaluator::operator()(const Point& v, const Point& xi) const {
  double s2 = 0.0, vv = 0.0, xx = 0.0;
  for (int i = 0; i < d_; ++i) {
    const double t = xi[i] - v[i];
    s2 += t * t;
    vv += v[i] * v[i];
    xx += xi[i] * xi[i];
  }
  const double s = std::sqrt(s2);
  const double q = (xx - vv) / s;
  // |zeta|^2 = |(xi+v)/2|^2 - (q/2)^2 and |xi+v|^2 = 2(vv+xx) - s2
  const double rho = std::sqrt(std::max(0.0, 0.25 * (2.0 * (vv + xx) - s2) - 0.25 * q * q));
  return k1(vv, xx, s) - k2(s, q, rho);
}

// ---------------------------------------------------------------------------

struct GradAssembler::CellNodes {
  std::vector<Point> far;       // kernel-order tensor nodes
  std::vector<double> far_w;    // absolute weights
  std::vector<double> far_vv;   // |v|^2
  std::vector<double> far_phi;  // n_local x nodes, row-major by node
};

GradAssembler::GradAssembler(const Mesh& mesh, const BasisSpec& basis, const OperatorParams& params,
                             const NuProfile& nu, const GradSettings& settings)
    : mesh_(mesh), basis_(basis), params_(params), nu_(nu), settings_(settings) {
  params.validate();
  require(params.integrable(), ErrorCode::not_applicable, "the Grad backend requires alpha < 0");
  require(basis.d == mesh.d() && params.d == mesh.d(), ErrorCode::invalid_argument, "dimension mismatch");
  require(settings.kernel_order >= 1 && settings.near_order >= 1 && settings.nu_order >= 1,
          ErrorCode::invalid_argument, "quadrature orders must be positive");
  const double rd = std::sqrt(static_cast<double>(mesh.d()));
  kernel_ = std::make_unique<KernelEvaluator>(params, 2.0 * rd * mesh.V() * 1.01, rd * mesh.V() * 1.01,
                                              settings.threads, settings.use_table);
  const int nl = basis.n_local();
  nodes_.resize(mesh.cells());
  for (int c = 0; c < mesh.cells(); ++c) {
    const Index3 k = mesh.multi(c);
    const Point w = mesh.center(k);
    ElementRule er = element_rule(mesh, k, settings.kernel_order);
    CellNodes& cn = nodes_[c];
    cn.far = er.nodes;
    cn.far_w.resize(er.nodes.size());
    cn.far_vv.resize(er.nodes.size());
    cn.far_phi.resize(er.nodes.size() * nl);
    for (std::size_t q = 0; q < er.nodes.size(); ++q) {
      cn.far_w[q] = er.weights[q] * mesh.volume();
      cn.far_vv[q] = norm2(er.nodes[q], mesh.d());
      for (int l = 0; l < nl; ++l) cn.far_phi[q * nl + l] = phi(l, er.nodes[q], w);
    }
  }
}

GradAssembler::~GradAssembler() = default;

namespace {

struct RNode {
  Point r;
  double w;
};

// Relative-coordinate nodes r = xi - v for the block (k, k + delta).
std::vector<RNode> relative_nodes(const Index3& delta, int d, double dv, int order) {
  struct Piece {
    double lo, hi;
    bool touches_zero;
  };
  std::array<std::array<Piece, 2>, 3> pieces{};
  for (int i = 0; i < d; ++i) {
    const int dl = delta[i];
    if (dl == 0)
      pieces[i] = {Piece{-dv, 0.0, true}, Piece{0.0, dv, true}};
    else if (dl == 1)
      pieces[i] = {Piece{0.0, dv, true}, Piece{dv, 2.0 * dv, false}};
    else
      pieces[i] = {Piece{-2.0 * dv, -dv, false}, Piece{-dv, 0.0, true}};
  }
  const quad::Rule1D& g = quad::gauss_legendre(order);
  std::vector<double> x01(order), w01(order);
  for (int a = 0; a < order; ++a) {
    x01[a] = 0.5 * (g.nodes[a] + 1.0);
    w01[a] = 0.5 * g.weights[a];
  }
  std::vector<RNode> out;
  const int combos = 1 << d;
  for (int mask = 0; mask < combos; ++mask) {
    Piece box[3];
    bool singular = true;
    for (int i = 0; i < d; ++i) {
      box[i] = pieces[i][(mask >> i) & 1];
      singular = singular && box[i].touches_zero;
    }
    if (singular) {
      // Duffy: split the unit cube into d pyramids with apex at the singular corner
      double sign[3];
      for (int i = 0; i < d; ++i) sign[i] = box[i].lo < 0.0 ? -dv : dv;
      const double jac = std::pow(dv, d);
      for (int j = 0; j < d; ++j) {
        const int ny = d == 2 ? order : order * order;
        for (int a = 0; a < order; ++a)
          for (int b = 0; b < ny; ++b) {
            const double t = x01[a];
            double y[2] = {x01[b % order], d == 3 ? x01[b / order] : 0.0};
            double wy = w01[b % order] * (d == 3 ? w01[b / order] : 1.0);
            RNode n{};
            int yi = 0;
            for (int i = 0; i < d; ++i) n.r[i] = sign[i] * (i == j ? t : t * y[yi++]);
            n.w = w01[a] * wy * jac * std::pow(t, d - 1);
            out.push_back(n);
          }
      }
    } else {
      const int total = d == 2 ? order * order : order * order * order;
      for (int idx = 0; idx < total; ++idx) {
        RNode n{};
        n.w = 1.0;
        int rem = idx;
        for (int i = 0; i < d; ++i) {
          const int a = rem % order;
          rem /= order;
          const double h = 0.5 * (box[i].hi - box[i].lo);
          n.r[i] = box[i].lo + h * (g.nodes[a] + 1.0);
          n.w *= h * g.weights[a];
        }
        out.push_back(n);
      }
    }
  }
  return out;
}

}  // namespace

void GradAssembler::near_block(const Index3& k, const Index3& m, Eigen::Ref<Eigen::MatrixXd> block,
                               AssemblyDiagnostics& diag) const {
  const int d = mesh_.d();
  const int nl = basis_.n_local();
  const double dv = mesh_.dv();
  Index3 delta{0, 0, 0};
  for (int i = 0; i < d; ++i) delta[i] = m[i] - k[i];
  const std::vector<RNode> rnodes = relative_nodes(delta, d, dv, settings_.near_order);
  const Point wk = mesh_.center(k), wm = mesh_.center(m);
  const int qv = settings_.kernel_order;
  const quad::Rule1D& g = quad::gauss_legendre(qv);
  const int nv = d == 2 ? qv * qv : qv * qv * qv;
  std::array<std::vector<double>, 3> vx, vw;
  for (int i = 0; i < d; ++i) {
    vx[i].resize(qv);
    vw[i].resize(qv);
  }
  double phi_v[4], phi_x[4];
  for (const RNode& rn : rnodes) {
    for (int i = 0; i < d; ++i) {
      const double lo = std::max(mesh_.lower(k[i]), mesh_.lower(m[i]) - rn.r[i]);
      const double hi = std::min(mesh_.upper(k[i]), mesh_.upper(m[i]) - rn.r[i]);
      const double h = 0.5 * (hi - lo);
      for (int a = 0; a < qv; ++a) {
        vx[i][a] = lo + h * (g.nodes[a] + 1.0);
        vw[i][a] = h * g.weights[a];
      }
    }
    for (int idx = 0; idx < nv; ++idx) {
      Point v{}, xi{};
      double w = rn.w;
      int rem = idx;
      for (int i = 0; i < d; ++i) {
        const int a = rem % qv;
        rem /= qv;
        v[i] = vx[i][a];
        xi[i] = v[i] + rn.r[i];
        w *= vw[i][a];
      }
      const double kv = w * (*kernel_)(v, xi);
      for (int l = 0; l < nl; ++l) {
        phi_v[l] = phi(l, v, wk);
        phi_x[l] = phi(l, xi, wm);
      }
      for (int a = 0; a < nl; ++a)
        for (int b = 0; b < nl; ++b) block(a, b) += kv * phi_v[a] * phi_x[b];
    }
  }
  diag.kernel_evaluations += static_cast<std::int64_t>(rnodes.size()) * nv;
}

double GradAssembler::phi(int l, const Point& v, const Point& w) const {
  const double b = basis_value(l, v, w, mesh_.dv());
  return settings_.representation == Representation::g ? b * std::sqrt(maxwellian(v, mesh_.d())) : b;
}

void GradAssembler::offset_block(const Index3& k, Eigen::Ref<Eigen::MatrixXd> block,
                                 AssemblyDiagnostics& diag) const {
  const int nl = basis_.n_local();
  const double vol = mesh_.volume();
  const Point w = mesh_.center(k);
  const ElementRule rv = element_rule(mesh_, k, settings_.kernel_order);
  const ElementRule rx = element_rule(mesh_, k, settings_.kernel_order + 1);
  for (std::size_t a = 0; a < rv.nodes.size(); ++a)
    for (std::size_t b = 0; b < rx.nodes.size(); ++b) {
      const double kv = rv.weights[a] * rx.weights[b] * vol * vol * (*kernel_)(rv.nodes[a], rx.nodes[b]);
      for (int l = 0; l < nl; ++l)
        for (int lp = 0; lp < nl; ++lp)
          block(l, lp) += kv * phi(l, rv.nodes[a], w) * phi(lp, rx.nodes[b], w);
    }
  diag.kernel_evaluations += static_cast<std::int64_t>(rv.nodes.size() * rx.nodes.size());
}

void GradAssembler::row_strip(int cell, Eigen::Ref<Eigen::MatrixXd> strip, AssemblyDiagnostics& diag) const {
  const int d = mesh_.d();
  const int nl = basis_.n_local();
  const Index3 k = mesh_.multi(cell);
  const CellNodes& ck = nodes_[cell];
  const std::size_t nq = ck.far.size();
  Eigen::MatrixXd block(nl, nl);
  std::vector<double> acc(nq * nl);
  for (int mc = 0; mc < mesh_.cells(); ++mc) {
    const Index3 m = mesh_.multi(mc);
    int dist = 0;
    for (int i = 0; i < d; ++i) dist = std::max(dist, std::abs(m[i] - k[i]));
    block.setZero();
    if (settings_.near_rule == NearRule::offset && mc == cell) {
      offset_block(k, block, diag);
    } else if (settings_.near_rule == NearRule::exact && dist <= 1) {
      near_block(k, m, block, diag);
    } else {
      const CellNodes& cm = nodes_[mc];
      // acc(a, l') = sum_b w_b k(v_a, xi_b) phi_l'(xi_b); then contract with phi_l(v_a)
      for (std::size_t a = 0; a < nq; ++a) {
        const Point& v = ck.far[a];
        double* out = &acc[a * nl];
        for (int l = 0; l < nl; ++l) out[l] = 0.0;
        for (std::size_t b = 0; b < nq; ++b) {
          const Point& xi = cm.far[b];
          double s2 = 0.0, sum2 = 0.0;
          for (int i = 0; i < d; ++i) {
            const double t = xi[i] - v[i];
            s2 += t * t;
          }
          const double vv = ck.far_vv[a], xx = cm.far_vv[b];
          sum2 = 2.0 * (vv + xx) - s2;
          const double s = std::sqrt(s2);
          const double q = (xx - vv) / s;
          const double rho = std::sqrt(std::max(0.0, 0.25 * (sum2 - q * q)));
          const double kv = cm.far_w[b] * (kernel_->k1(vv, xx, s) - kernel_->k2(s, q, rho));
          for (int l = 0; l < nl; ++l) out[l] += kv * cm.far_phi[b * nl + l];
        }
      }
      for (std::size_t a = 0; a < nq; ++a) {
        const double wa = ck.far_w[a];
        for (int l = 0; l < nl; ++l)
          for (int lp = 0; lp < nl; ++lp) block(l, lp) += wa * ck.far_phi[a * nl + l] * acc[a * nl + lp];
      }
      diag.kernel_evaluations += static_cast<std::int64_t>(nq * nq);
    }
    if (mc == cell) {
      const Point w = mesh_.center(k);
      const ElementRule er = element_rule(mesh_, k, settings_.nu_order);
      for (std::size_t q = 0; q < er.nodes.size(); ++q) {
        const double nw = er.weights[q] * mesh_.volume() * collision_frequency(er.nodes[q], nu_);
        for (int a = 0; a < nl; ++a)
          for (int b = 0; b < nl; ++b)
            block(a, b) += nw * phi(a, er.nodes[q], w) * phi(b, er.nodes[q], w);
      }
    }
    strip.block(0, mc * nl, nl, nl) = block / mesh_.volume();
  }
}

CollisionMatrix assemble_grad(const Mesh& mesh, const BasisSpec& basis, const OperatorParams& params,
                              const NuProfile& nu, const GradSettings& settings) {
  GradAssembler asmb(mesh, basis, params, nu, settings);
  return assemble_full(asmb, settings.threads, settings.memory_budget);
}

}  // namespace boltzgap
