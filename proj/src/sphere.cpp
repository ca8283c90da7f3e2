#include "boltzgap/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "boltzgap/error.hpp"
#include "boltzgap/quadrature.hpp"
#include "special.hpp"

namespace boltzgap {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap(double x) {
  x = std::fmod(x, two_pi);
  return x < 0.0 ? x + two_pi : x;
}

std::vector<Interval> arc(double center, double half) {
  if (half >= std::numbers::pi) return {{0.0, two_pi}};
  if (half <= 0.0) return {};
  double lo = center - half, hi = center + half;
  const double shift = std::floor(lo / two_pi) * two_pi;
  lo -= shift;
  hi -= shift;
  if (hi <= two_pi) return {{lo, hi}};
  return {{lo, two_pi}, {0.0, hi - two_pi}};
}

}  // namespace

IntervalSet::IntervalSet(std::vector<Interval> pieces) {
  for (auto& p : pieces) {
    p.lo = std::max(p.lo, 0.0);
    p.hi = std::min(p.hi, two_pi);
  }
  std::erase_if(pieces, [](const Interval& p) { return !(p.hi > p.lo); });
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& p : pieces) {
    if (!iv_.empty() && p.lo <= iv_.back().hi)
      iv_.back().hi = std::max(iv_.back().hi, p.hi);
    else
      iv_.push_back(p);
  }
}

IntervalSet IntervalSet::full() { return IntervalSet({{0.0, two_pi}}); }

double IntervalSet::measure() const {
  double s = 0.0;
  for (const auto& p : iv_) s += p.hi - p.lo;
  return s;
}

bool IntervalSet::contains(double x) const {
  for (const auto& p : iv_)
    if (x >= p.lo && x < p.hi) return true;
  return false;
}

IntervalSet IntervalSet::intersect(const IntervalSet& o) const {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < iv_.size() && j < o.iv_.size()) {
    const double lo = std::max(iv_[i].lo, o.iv_[j].lo);
    const double hi = std::min(iv_[i].hi, o.iv_[j].hi);
    if (hi > lo) out.push_back({lo, hi});
    if (iv_[i].hi < o.iv_[j].hi)
      ++i;
    else
      ++j;
  }
  return IntervalSet(std::move(out));
}

IntervalSet band_set(double p, double s, double beta, double lo, double hi) {
  if (!(s > 1e-15 * (std::abs(p) + 1.0))) return (p >= lo && p < hi) ? IntervalSet::full() : IntervalSet();
  const double a = (lo - p) / s, b = (hi - p) / s;
  IntervalSet lower, upper;
  if (a <= -1.0)
    lower = IntervalSet::full();
  else if (a <= 1.0)
    lower = IntervalSet(arc(beta, std::acos(a)));
  if (b > 1.0)
    upper = IntervalSet::full();
  else if (b > -1.0)
    upper = IntervalSet(arc(beta + std::numbers::pi, std::numbers::pi - std::acos(b)));
  return lower.intersect(upper);
}

Point RotationFrame::to_global(const Point& s) const {
  Point g{};
  for (int i = 0; i < d; ++i)
    for (int r = 0; r < d; ++r) g[i] += A[r][i] * s[r];
  return g;
}

RotationFrame identity_frame(int d) {
  RotationFrame f;
  f.d = d;
  for (int i = 0; i < d; ++i) f.A[i][i] = 1.0;
  return f;
}

RotationFrame rotation_frame(const Point& u, int d) {
  require(d == 2 || d == 3, ErrorCode::invalid_argument, "rotation frame needs d = 2 or 3");
  const double n = std::sqrt(norm2(u, d));
  require(n > 0.0, ErrorCode::invalid_argument, "rotation frame of the zero vector");
  RotationFrame f;
  f.d = d;
  f.u = u;
  if (d == 2) {
    f.A[0] = {-u[1] / n, u[0] / n, 0.0};
    f.A[1] = {u[0] / n, u[1] / n, 0.0};
    return f;
  }
  const double rho = std::hypot(u[0], u[1]);
  if (rho == 0.0) {
    // u along the third axis; the reversed case needs a half turn to keep A u = |u| e_3
    const double s = u[2] > 0.0 ? 1.0 : -1.0;
    f.A[0] = {1.0, 0.0, 0.0};
    f.A[1] = {0.0, s, 0.0};
    f.A[2] = {0.0, 0.0, s};
    return f;
  }
  f.A[0] = {u[0] * u[2] / (rho * n), u[1] * u[2] / (rho * n), -rho / n};
  f.A[1] = {-u[1] / rho, u[0] / rho, 0.0};
  f.A[2] = {u[0] / n, u[1] / n, u[2] / n};
  return f;
}

namespace {

template <class Bounds>
IntervalSet intervals_for(const Mesh& mesh, const Point& v, const Point& u, std::optional<double> polar,
                          const RotationFrame* frame, Bounds&& bounds) {
  const int d = mesh.d();
  const RotationFrame F = frame ? *frame : identity_frame(d);
  const double r = 0.5 * std::sqrt(norm2(u, d));
  IntervalSet set = IntervalSet::full();
  for (int i = 0; i < d; ++i) {
    const double c = v[i] - 0.5 * u[i];
    auto [lo, hi] = bounds(i);
    if (d == 2) {
      set = set.intersect(band_set(c, r, std::atan2(F.A[0][i], F.A[1][i]), lo, hi));
    } else {
      require(polar.has_value(), ErrorCode::invalid_argument, "d = 3 target intervals need a polar angle");
      const double th = *polar;
      const double P = c + r * F.A[2][i] * std::cos(th);
      const double S = r * std::sin(th) * std::hypot(F.A[0][i], F.A[1][i]);
      set = set.intersect(band_set(P, S, std::atan2(F.A[1][i], F.A[0][i]), lo, hi));
    }
  }
  return set;
}

}  // namespace

IntervalSet target_intervals(const Mesh& mesh, const Point& v, const Point& u, int cell, std::optional<double> polar,
                             const RotationFrame* frame) {
  const Index3 k = mesh.multi(cell);
  return intervals_for(mesh, v, u, polar, frame,
                       [&](int i) { return std::pair{mesh.lower(k[i]), mesh.upper(k[i])}; });
}

IntervalSet domain_intervals(const Mesh& mesh, const Point& v, const Point& u, std::optional<double> polar,
                             const RotationFrame* frame) {
  return intervals_for(mesh, v, u, polar, frame, [&](int) { return std::pair{-mesh.V(), mesh.V()}; });
}

SphereSweep::SphereSweep(const Mesh& mesh, const BasisSpec& basis, const CrossSection& cs, const AngularOptions& opt)
    : mesh_(mesh), basis_(basis), cs_(cs), opt_(opt) {
  require(opt.tol > 0.0 && opt.max_intervals > 0, ErrorCode::invalid_argument, "angular tolerance must be positive");
  const int M = basis_size(mesh, basis);
  acc_.assign(M, 0.0);
  kr_.assign(M, 0.0);
  ga_.assign(M, 0.0);
  used_.assign(M, 0);
  tmp_used_.assign(M, 0);
}

void SphereSweep::add(int idx, double value) {
  if (!used_[idx]) {
    used_[idx] = 1;
    acc_[idx] = 0.0;
    touched_.push_back(idx);
  }
  acc_[idx] += value;
}

double cap_integral(const CrossSection& cs, double t0) {
  const double a = cs.params.alpha, amp = cs.amplitude;
  if (cs.params.d == 3) return 8.0 * std::numbers::pi * amp * std::pow(t0, 2.0 - a) / (2.0 - a);
  return 2.0 * amp * detail::beta_incomplete(0.5 * (2.0 - a), 0.5, t0 * t0);
}

double tail_integral(const CrossSection& cs, double t0) {
  const double a = cs.params.alpha, amp = cs.amplitude;
  if (cs.params.d == 3) {
    if (a == 0.0) return -8.0 * std::numbers::pi * amp * std::log(t0);
    return 8.0 * std::numbers::pi * amp * (1.0 - std::pow(t0, -a)) / (-a);
  }
  const double th0 = 2.0 * std::asin(t0);
  if (cs.constant()) return 2.0 * amp * (std::numbers::pi - th0);
  const double e = cs.exponent();
  quad::AdaptiveOptions o;
  o.abs_tol = 0.0;
  o.rel_tol = 1e-12;
  const quad::Result r =
      quad::integrate([&](double t) { return std::pow(std::sin(0.5 * t), e); }, th0, std::numbers::pi, o);
  return 2.0 * amp * r.value;
}

double SphereSweep::cap_integral(double t0) const { return boltzgap::cap_integral(cs_, t0); }
double SphereSweep::loss_integral(double t0) const { return tail_integral(cs_, t0); }

const std::vector<std::pair<int, double>>& SphereSweep::run(const Point& v, const Point& u) {
  for (int idx : touched_) used_[idx] = 0;
  touched_.clear();
  out_.clear();
  last_error_ = 0.0;
  last_converged_ = true;
  const int d = mesh_.d(), nl = basis_.n_local();
  const double un = std::sqrt(norm2(u, d));
  require(un > 0.0, ErrorCode::invalid_argument, "angular integral with u = 0");
  const std::optional<Index3> k0 = mesh_.locate(v);
  require(k0.has_value(), ErrorCode::invalid_argument, "angular integral with v outside the mesh");
  const int c0 = mesh_.flat(*k0);
  const Point w0 = mesh_.center(*k0);
  const RotationFrame F = rotation_frame(u, d);
  Point c{};
  for (int i = 0; i < d; ++i) c[i] = v[i] - 0.5 * u[i];
  const double r = 0.5 * un;

  double dist = mesh_.dv();
  for (int i = 0; i < d; ++i)
    dist = std::min({dist, v[i] - mesh_.lower((*k0)[i]), mesh_.upper((*k0)[i]) - v[i]});
  const double t0 = std::min(1.0, std::max(dist, 0.0) / un);
  if (nl > 1) {
    const double cap = cap_integral(t0);
    for (int i = 0; i < d; ++i) add(global_index(c0, i + 1, basis_), -u[i] / mesh_.dv() * cap);
  }
  if (t0 < 1.0) {
    const double theta0 = 2.0 * std::asin(t0);
    const double loss = loss_integral(t0);
    for (int l = 0; l < nl; ++l) add(global_index(c0, l, basis_), -basis_value(l, v, w0, mesh_.dv()) * loss);
    if (d == 2)
      sweep2(c, r, F, theta0);
    else
      sweep3(c, r, F, theta0, loss);
    // the error tolerance is relative to the loss magnitude
    if (!last_converged_) ++stats_.failures;
  }
  ++stats_.integrals;
  stats_.max_error = std::max(stats_.max_error, last_error_);
  out_.reserve(touched_.size());
  for (int idx : touched_) out_.emplace_back(idx, acc_[idx]);
  return out_;
}

void SphereSweep::sweep2(const Point& c, double r, const RotationFrame& F, double theta0) {
  const int nl = basis_.n_local();
  const double dv = mesh_.dv(), amp = cs_.amplitude, e = cs_.exponent();
  const double tlo = theta0, thi = two_pi - theta0;
  double beta[2];
  cross_.clear();
  cross_.push_back(tlo);
  cross_.push_back(thi);
  for (int i = 0; i < 2; ++i) {
    beta[i] = std::atan2(F.A[0][i], F.A[1][i]);
    for (int j = 0; j <= mesh_.N(); ++j) {
      const double q = (mesh_.lower(j) - c[i]) / r;
      if (std::abs(q) >= 1.0) continue;
      const double a = std::acos(q);
      for (double t : {wrap(beta[i] + a), wrap(beta[i] - a)})
        if (t > tlo && t < thi) cross_.push_back(t);
    }
  }
  std::sort(cross_.begin(), cross_.end());
  const double scale = loss_integral(std::sin(0.5 * theta0));
  for (std::size_t s = 0; s + 1 < cross_.size(); ++s) {
    const double ta = cross_[s], tb = cross_[s + 1];
    if (!(tb > ta)) continue;
    const double tm = 0.5 * (ta + tb);
    Point vp{};
    for (int i = 0; i < 2; ++i) vp[i] = c[i] + r * std::cos(tm - beta[i]);
    const std::optional<Index3> m = mesh_.locate(vp);
    if (!m) continue;
    const int cell = mesh_.flat(*m);
    const Point wm = mesh_.center(*m);
    double val[4] = {0, 0, 0, 0};
    if (cs_.constant()) {
      val[0] = amp * (tb - ta);
      for (int l = 1; l < nl; ++l) {
        const int i = l - 1;
        val[l] = amp * ((c[i] - wm[i]) * (tb - ta) + r * (std::sin(tb - beta[i]) - std::sin(ta - beta[i]))) / dv;
      }
    } else {
      // adaptive G7/K15 on the arc; b is smooth here since theta >= theta0 > 0
      struct Piece {
        double a, b;
      };
      std::vector<Piece> stack{{ta, tb}};
      int pieces = 0;
      const double tol = opt_.tol * scale;
      while (!stack.empty()) {
        const Piece p = stack.back();
        stack.pop_back();
        double kv[4] = {0, 0, 0, 0}, gv[4] = {0, 0, 0, 0};
        const double h = 0.5 * (p.b - p.a), mid = 0.5 * (p.a + p.b);
        auto eval = [&](double t, double wk, double wg) {
          const double bw = amp * std::pow(std::sin(0.5 * t), e);
          for (int l = 0; l < nl; ++l) {
            const double phi = l == 0 ? 1.0 : (c[l - 1] + r * std::cos(t - beta[l - 1]) - wm[l - 1]) / dv;
            kv[l] += wk * bw * phi;
            gv[l] += wg * bw * phi;
          }
        };
        eval(mid, quad::detail::wgk[7], quad::detail::wg[3]);
        for (int j = 0; j < 7; ++j) {
          const double wgj = j % 2 == 1 ? quad::detail::wg[j / 2] : 0.0;
          eval(mid - h * quad::detail::xgk[j], quad::detail::wgk[j], wgj);
          eval(mid + h * quad::detail::xgk[j], quad::detail::wgk[j], wgj);
        }
        double err = 0.0;
        for (int l = 0; l < nl; ++l) err = std::max(err, std::abs(kv[l] - gv[l]) * h);
        ++pieces;
        if (err <= tol * (p.b - p.a) / (tb - ta) || pieces >= opt_.max_intervals || h < 1e-13) {
          if (err > tol * (p.b - p.a) / (tb - ta)) last_converged_ = false;
          for (int l = 0; l < nl; ++l) val[l] += kv[l] * h;
          last_error_ += err;
        } else {
          stack.push_back({p.a, mid});
          stack.push_back({mid, p.b});
        }
      }
    }
    for (int l = 0; l < nl; ++l) add(global_index(cell, l, basis_), val[l]);
  }
}

void SphereSweep::polar_node(const Point& c, double r, const RotationFrame& F, double theta, double wk, double wg) {
  const int nl = basis_.n_local();
  const double dv = mesh_.dv();
  const double st = std::sin(theta), ct = std::cos(theta);
  const double bw = st * cs_.amplitude * std::pow(std::sin(0.5 * theta), cs_.exponent());
  double P[3], S[3], beta[3];
  cross_.clear();
  for (int i = 0; i < 3; ++i) {
    P[i] = c[i] + r * F.A[2][i] * ct;
    S[i] = r * st * std::hypot(F.A[0][i], F.A[1][i]);
    beta[i] = std::atan2(F.A[1][i], F.A[0][i]);
    if (!(S[i] > 1e-14 * r)) continue;
    const int jlo = std::max(0, static_cast<int>(std::floor((P[i] - S[i] + mesh_.V()) / dv)));
    const int jhi = std::min(mesh_.N(), static_cast<int>(std::ceil((P[i] + S[i] + mesh_.V()) / dv)));
    for (int j = jlo; j <= jhi; ++j) {
      const double q = (mesh_.lower(j) - P[i]) / S[i];
      if (std::abs(q) >= 1.0) continue;
      const double a = std::acos(q);
      cross_.push_back(wrap(beta[i] + a));
      cross_.push_back(wrap(beta[i] - a));
    }
  }
  std::sort(cross_.begin(), cross_.end());
  const std::size_t n = cross_.size();
  const std::size_t arcs = n == 0 ? 1 : n;
  for (std::size_t s = 0; s < arcs; ++s) {
    const double pa = n == 0 ? 0.0 : cross_[s];
    const double pb = n == 0 ? two_pi : (s + 1 < n ? cross_[s + 1] : cross_[0] + two_pi);
    if (!(pb > pa)) continue;
    const double pm = 0.5 * (pa + pb);
    Point vp{};
    for (int i = 0; i < 3; ++i) vp[i] = P[i] + S[i] * std::cos(pm - beta[i]);
    const std::optional<Index3> m = mesh_.locate(vp);
    if (!m) continue;
    const int cell = mesh_.flat(*m);
    const Point wm = mesh_.center(*m);
    for (int l = 0; l < nl; ++l) {
      double val;
      if (l == 0) {
        val = pb - pa;
      } else {
        const int i = l - 1;
        val = ((P[i] - wm[i]) * (pb - pa) + S[i] * (std::sin(pb - beta[i]) - std::sin(pa - beta[i]))) / dv;
      }
      val *= bw;
      const int idx = global_index(cell, l, basis_);
      if (!tmp_used_[idx]) {
        tmp_used_[idx] = 1;
        kr_[idx] = ga_[idx] = 0.0;
        tmp_touched_.push_back(idx);
      }
      kr_[idx] += wk * val;
      ga_[idx] += wg * val;
    }
  }
}

void SphereSweep::sweep3(const Point& c, double r, const RotationFrame& F, double theta0, double scale) {
  const double pi = std::numbers::pi;
  // Breakpoints: tangencies of the azimuthal circle with grid planes, polar
  // angles where grid edges pierce the sphere, and a geometric grading
  // towards theta0 where b is largest.
  std::vector<double> brk{theta0, pi};
  for (double t = 2.0 * theta0; t < pi; t *= 2.0) brk.push_back(t);
  std::array<std::vector<double>, 3> planes;
  for (int i = 0; i < 3; ++i) {
    const double bp = std::atan2(std::hypot(F.A[0][i], F.A[1][i]), F.A[2][i]);
    for (int j = 0; j <= mesh_.N(); ++j) {
      const double q = (mesh_.lower(j) - c[i]) / r;
      if (std::abs(q) >= 1.0) continue;
      planes[i].push_back(q);
      const double a = std::acos(q);
      for (double t : {bp + a, bp - a, -bp + a, -bp - a})
        if (t > theta0 && t < pi) brk.push_back(t);
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const int k = 3 - i - j;
      for (double si : planes[i])
        for (double sj : planes[j]) {
          const double q = 1.0 - si * si - sj * sj;
          if (q <= 0.0) continue;
          for (double sk : {std::sqrt(q), -std::sqrt(q)}) {
            const double ct = F.A[2][i] * si + F.A[2][j] * sj + F.A[2][k] * sk;
            const double t = std::acos(std::clamp(ct, -1.0, 1.0));
            if (t > theta0 && t < pi) brk.push_back(t);
          }
        }
    }
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end()), brk.end());

  // Each panel [A, B] is mapped by theta = A + (B - A)(3s^2 - 2s^3), which
  // flattens the square-root behaviour of arc lengths at tangencies.
  struct Piece {
    double A, B, sa, sb;
  };
  auto theta_of = [](const Piece& p, double s) { return p.A + (p.B - p.A) * s * s * (3.0 - 2.0 * s); };
  std::vector<Piece> stack;
  for (std::size_t s = brk.size() - 1; s-- > 0;)
    if (brk[s + 1] > brk[s]) stack.push_back({brk[s], brk[s + 1], 0.0, 1.0});
  const double span = pi - theta0;
  const double tol = opt_.tol * scale;
  int pieces = 0;
  while (!stack.empty()) {
    const Piece p = stack.back();
    stack.pop_back();
    const double h = 0.5 * (p.sb - p.sa), mid = 0.5 * (p.sa + p.sb);
    for (int idx : tmp_touched_) tmp_used_[idx] = 0;
    tmp_touched_.clear();
    auto node = [&](double s, double wk, double wg) {
      const double jac = 6.0 * (p.B - p.A) * s * (1.0 - s);
      polar_node(c, r, F, theta_of(p, s), wk * h * jac, wg * h * jac);
    };
    node(mid, quad::detail::wgk[7], quad::detail::wg[3]);
    for (int j = 0; j < 7; ++j) {
      const double wgj = j % 2 == 1 ? quad::detail::wg[j / 2] : 0.0;
      node(mid - h * quad::detail::xgk[j], quad::detail::wgk[j], wgj);
      node(mid + h * quad::detail::xgk[j], quad::detail::wgk[j], wgj);
    }
    double err = 0.0;
    for (int idx : tmp_touched_) err = std::max(err, std::abs(kr_[idx] - ga_[idx]));
    ++pieces;
    const double local = std::max(tol * (theta_of(p, p.sb) - theta_of(p, p.sa)) / span, 1e-14 * scale);
    if (err <= local || pieces + static_cast<int>(stack.size()) >= opt_.max_intervals || h < 1e-12) {
      if (err > local) last_converged_ = false;
      for (int idx : tmp_touched_) add(idx, kr_[idx]);
      last_error_ += err;
    } else {
      stack.push_back({p.A, p.B, mid, p.sb});
      stack.push_back({p.A, p.B, p.sa, mid});
    }
  }
  for (int idx : tmp_touched_) tmp_used_[idx] = 0;
  tmp_touched_.clear();
}

AngularValue angular_integral(const Point& v, const Point& u, int cell, int local, const CrossSection& cs,
                              const Mesh& mesh, const BasisSpec& basis, double tol) {
  require(cell >= 0 && cell < mesh.cells() && local >= 0 && local < basis.n_local(), ErrorCode::invalid_argument,
          "cell or local index out of range");
  AngularOptions opt;
  opt.tol = tol;
  SphereSweep sweep(mesh, basis, cs, opt);
  AngularValue out;
  const int idx = global_index(cell, local, basis);
  for (const auto& [i, val] : sweep.run(v, u))
    if (i == idx) out.value = val;
  out.error = sweep.last_error();
  out.converged = sweep.last_converged();
  return out;
}

}  // namespace boltzgap
