#include "boltzgap/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "boltzgap/error.hpp"

namespace boltzgap::quad {

namespace {

Rule1D build_legendre(int n) {
  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

Rule1D build_hermite_prob(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double norm = std::sqrt(2.0 * std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    r.weights[i] = norm * v0 * v0;
  }
  // symmetrize the rule exactly
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    const double w = 0.5 * (r.weights[n - 1 - i] + r.weights[i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

template <class Builder>
const Rule1D& cached(std::map<int, std::unique_ptr<Rule1D>>& cache, std::mutex& m, int n, Builder build) {
  require(n >= 1 && n <= 512, ErrorCode::invalid_argument, "quadrature order out of range");
  std::lock_guard lock(m);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Rule1D>(build(n));
  return *slot;
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
  static std::map<int, std::unique_ptr<Rule1D>> cache;
  static std::mutex m;
  return cached(cache, m, n, build_legendre);
}

Rule1D gauss_legendre(int n, double a, double b) {
  const Rule1D& ref = gauss_legendre(n);
  Rule1D r = ref;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r.nodes[i] = c + h * ref.nodes[i];
    r.weights[i] = h * ref.weights[i];
  }
  return r;
}

const Rule1D& gauss_hermite_prob(int n) {
  static std::map<int, std::unique_ptr<Rule1D>> cache;
  static std::mutex m;
  return cached(cache, m, n, build_hermite_prob);
}

VectorResult integrate_vector(const VectorIntegrand& f, std::size_t dim, std::span<const double> breaks,
                              const AdaptiveOptions& opt) {
  struct Piece {
    double a, b, error;
    std::vector<double> value;
  };
  std::vector<double> fx(dim), k(dim), g(dim);
  auto eval = [&](double a, double b, Piece& p) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::fill(k.begin(), k.end(), 0.0);
    std::fill(g.begin(), g.end(), 0.0);
    f(c, fx);
    for (std::size_t i = 0; i < dim; ++i) {
      k[i] += detail::wgk[7] * fx[i];
      g[i] += detail::wg[3] * fx[i];
    }
    for (int j = 0; j < 7; ++j) {
      const double dx = h * detail::xgk[j];
      for (int side = 0; side < 2; ++side) {
        f(side == 0 ? c - dx : c + dx, fx);
        for (std::size_t i = 0; i < dim; ++i) {
          k[i] += detail::wgk[j] * fx[i];
          if (j % 2 == 1) g[i] += detail::wg[j / 2] * fx[i];
        }
      }
    }
    p.a = a;
    p.b = b;
    p.value.resize(dim);
    double e = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      p.value[i] = k[i] * h;
      e = std::max(e, std::abs((k[i] - g[i]) * h));
    }
    p.error = e;
  };

  VectorResult res;
  res.value.assign(dim, 0.0);
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    Piece p;
    eval(breaks[i], breaks[i + 1], p);
    res.evaluations += 15;
    pieces.push_back(std::move(p));
  }
  auto total_error = [&] {
    double e = 0.0;
    for (const auto& p : pieces) e += p.error;
    return e;
  };
  auto total_scale = [&] {
    double s = 0.0;
    std::vector<double> acc(dim, 0.0);
    for (const auto& p : pieces)
      for (std::size_t i = 0; i < dim; ++i) acc[i] += p.value[i];
    for (double v : acc) s = std::max(s, std::abs(v));
    return s;
  };
  double err = total_error();
  double scale = total_scale();
  int intervals = static_cast<int>(pieces.size());
  while (!pieces.empty() && err > std::max(opt.abs_tol, opt.rel_tol * scale) && intervals < opt.max_intervals) {
    auto worst = std::max_element(pieces.begin(), pieces.end(),
                                  [](const Piece& x, const Piece& y) { return x.error < y.error; });
    const double a = worst->a, b = worst->b, m = 0.5 * (a + b);
    if (!(m > a && m < b)) break;
    Piece left, right;
    eval(a, m, left);
    eval(m, b, right);
    res.evaluations += 30;
    *worst = std::move(left);
    pieces.push_back(std::move(right));
    ++intervals;
    err = total_error();
    if (intervals % 16 == 0) scale = total_scale();
  }
  for (const auto& p : pieces)
    for (std::size_t i = 0; i < dim; ++i) res.value[i] += p.value[i];
  res.error = err;
  double s = 0.0;
  for (double v : res.value) s = std::max(s, std::abs(v));
  res.converged = err <= std::max(opt.abs_tol, opt.rel_tol * s);
  return res;
}

}  // namespace boltzgap::quad
