#pragma once

// One-dimensional quadrature building blocks: Gauss-Legendre, Gauss-Hermite
// and an adaptive Gauss-Kronrod (7/15) integrator for scalar and vector
// integrands.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace boltzgap::quad {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1]. Rules are cached per n.
const Rule1D& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
Rule1D gauss_legendre(int n, double a, double b);

/// n-point Gauss-Hermite rule for the weight exp(-x^2/2) (weights sum to sqrt(2 pi)).
const Rule1D& gauss_hermite_prob(int n);

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct AdaptiveOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_intervals = 2000;
};

namespace detail {
// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                  0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                  0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                 0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(F&& f, double a, double b, double& kron, double& err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * wgk[7];
  double g = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * xgk[j];
    const double s = f(c - dx) + f(c + dx);
    k += wgk[j] * s;
    if (j % 2 == 1) g += wg[j / 2] * s;
  }
  kron = k * h;
  err = std::abs((k - g) * h);
}
}  // namespace detail

/// Adaptive bisection with the G7/K15 pair; the interval with the largest
/// error estimate is refined first until the global estimate meets the
/// tolerance or the interval budget is exhausted.
template <class F>
Result integrate(F&& f, double a, double b, const AdaptiveOptions& opt = {}) {
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  Result res;
  if (!(b > a)) {
    res.converged = true;
    return res;
  }
  std::priority_queue<Piece> heap;
  double v, e;
  detail::gk15(f, a, b, v, e);
  res.evaluations = 15;
  heap.push({a, b, v, e});
  double total = v, err = e;
  int intervals = 1;
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) && intervals < opt.max_intervals) {
    Piece p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {
      heap.push(p);
      break;
    }
    double v1, e1, v2, e2;
    detail::gk15(f, p.a, m, v1, e1);
    detail::gk15(f, m, p.b, v2, e2);
    res.evaluations += 30;
    total += v1 + v2 - p.value;
    err += e1 + e2 - p.error;
    heap.push({p.a, m, v1, e1});
    heap.push({m, p.b, v2, e2});
    ++intervals;
  }
  // Re-sum to shed the drift of incremental updates.
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  res.value = total;
  res.error = err;
  res.converged = err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
  return res;
}

/// Integrates f over consecutive panels [breaks[i], breaks[i+1]].
template <class F>
Result integrate_panels(F&& f, std::span<const double> breaks, const AdaptiveOptions& opt = {}) {
  Result total;
  total.converged = true;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    Result r = integrate(f, breaks[i], breaks[i + 1], opt);
    total.value += r.value;
    total.error += r.error;
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
  }
  return total;
}

struct VectorResult {
  std::vector<double> value;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Vector-valued integrand: f(x, out) must overwrite out[0..dim). The error
/// estimate is the max-norm of the G7/K15 difference summed over intervals.
using VectorIntegrand = std::function<void(double, std::span<double>)>;

VectorResult integrate_vector(const VectorIntegrand& f, std::size_t dim, std::span<const double> breaks,
                              const AdaptiveOptions& opt);

}  // namespace boltzgap::quad
