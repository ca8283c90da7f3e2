// Acceptance checks, one per criterion: `acceptance <n>` prints one PASS/FAIL
// line and exits nonzero on failure. Tolerances are fixed; see the README.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "boltzgap/driver.hpp"
#include "boltzgap/error.hpp"
#include "boltzgap/grad.hpp"
#include "boltzgap/kernels.hpp"
#include "boltzgap/mesh.hpp"
#include "boltzgap/spectra.hpp"
#include "boltzgap/sphere.hpp"

using namespace boltzgap;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig maxwell2d() {
  RunConfig c;
  c.params = make_params(2, 0.0, -1.0);
  c.V = {5.0};
  c.N = {24};
  return c;
}

std::vector<ResultRecord> run_ok(const RunConfig& cfg) {
  const RunReport r = run(cfg);
  if (!r.failures.empty()) throw Error(r.failures.front().code, r.failures.front().message);
  return r.records;
}

double gap_of(const RunConfig& cfg) { return run_ok(cfg).front().gap; }

// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome c1() {
  const auto t0 = std::chrono::steady_clock::now();
  const double g = gap_of(maxwell2d());
  const double t = elapsed(t0);
  return {std::abs(g - 0.25) <= 0.02 && t <= 300.0,
          "2d Maxwell V=5 N=24 p0 gap " + fmt("%.6f", g) + " (0.25 +- 0.02), " + fmt("%.1f", t) + " s (<= 300 s)"};
}

Outcome c2() {
  const double gammas[] = {0, 0.1, 0.25, 0.5, 0.75, 0.9, 1};
  const double table[] = {0.25, 0.29, 0.34, 0.44, 0.58, 0.67, 0.72};
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string s;
  double prev = -1.0;
  for (int i = 0; i < 7; ++i) {
    RunConfig c = maxwell2d();
    c.params.gamma = gammas[i];
    const double g = gap_of(c);
    const bool hit = std::abs(g - table[i]) <= 0.03;
    ok = ok && hit && g > prev;
    prev = g;
    s += fmt(" %.4f", g) + (hit ? "" : "!");
  }
  const double t = elapsed(t0);
  ok = ok && t <= 1800.0;
  return {ok, "2d V=5 N=24 gamma sweep gaps" + s + " (table +- 0.03, increasing), " + fmt("%.0f", t) + " s"};
}

Outcome c3() {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig c;
  c.params = make_params(3, 0.0, -2.0);
  c.V = {5.0};
  c.N = {20};
  c.p = 0;
  const double g0 = gap_of(c);
  c.p = 1;
  const double g1 = gap_of(c);
  const double t = elapsed(t0);
  const bool ok = std::abs(g0 - 0.383798) <= 0.02 && std::abs(g1 - 0.351826) <= 0.02 &&
                  std::abs(g1 - 1.0 / 3) < std::abs(g0 - 1.0 / 3) && t <= 4 * 3600.0;
  return {ok, "3d Maxwell V=5 N=20 gap p0 " + fmt("%.6f", g0) + " (0.383798 +- 0.02) p1 " + fmt("%.6f", g1) +
                  " (0.351826 +- 0.02), " + fmt("%.0f", t) + " s"};
}

Outcome c4() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<int> Ns{8, 12, 16, 20, 24};
  bool ok = true;
  std::string s;
  for (int p : {0, 1}) {
    std::vector<double> dv, err;
    for (int N : Ns) {
      RunConfig c = maxwell2d();
      c.N = {N};
      c.p = p;
      dv.push_back(10.0 / N);
      err.push_back(std::abs(gap_of(c) - 0.25));
    }
    bool mono = true;
    for (std::size_t i = 1; i < err.size(); ++i) mono = mono && err[i] < err[i - 1];
    const double slope = loglog_slope(dv, err);
    const bool in = p == 0 ? (slope >= 0.7 && slope <= 1.5) : (slope >= 1.5 && slope <= 2.5);
    ok = ok && mono && in;
    s += " p" + std::to_string(p) + ": errors";
    for (double e : err) s += fmt(" %.2e", e);
    s += (mono ? "" : " (not monotone)") + fmt(" slope %.3f", slope) + (p == 0 ? " in [0.7,1.5]" : " in [1.5,2.5]");
    s += in ? "" : "!";
  }
  const double t = elapsed(t0);
  ok = ok && t <= 1800.0;
  return {ok, "2d Maxwell convergence" + s + ", " + fmt("%.0f", t) + " s"};
}

Outcome c5() {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<int, double> gap;
  bool dec = true;
  std::string s;
  for (int V = 4; V <= 9; ++V) {
    RunConfig c;
    c.params = make_params(2, -1.0, -1.0);
    c.V = {double(V)};
    c.fixed_dv = 0.5;
    gap[V] = gap_of(c);
    if (V > 4) dec = dec && gap[V] < gap[V - 1];
    s += fmt(" %.5f", gap[V]);
  }
  const double t = elapsed(t0);
  const bool ok = dec && gap[9] < 0.5 * gap[5] && t <= 1800.0;
  return {ok, "2d soft gamma=-1 dv=0.5 gaps V=4..9" + s + (dec ? " decreasing" : " not decreasing") +
                  fmt(", gap(9)/gap(5) %.3f (< 0.5), ", gap[9] / gap[5]) + fmt("%.0f s", t)};
}

Outcome c6() {
  struct Case {
    int d;
    double gamma, alpha, V;
    int N, p;
    BackendChoice b;
  };
  const std::vector<Case> cases{{2, 0, -1, 5, 24, 0, BackendChoice::grad},   {2, 1, -1, 5, 16, 1, BackendChoice::grad},
                                {2, -1, -1, 6, 24, 0, BackendChoice::grad},  {2, 0, -1, 4, 8, 0, BackendChoice::direct},
                                {2, 0.5, 0, 4, 8, 1, BackendChoice::direct}, {3, 0, -2, 4, 6, 0, BackendChoice::grad},
                                {3, 1, -2, 4, 4, 1, BackendChoice::grad}};
  bool ok = true;
  int n = 0;
  double worst = 0.0;
  for (const Case& k : cases) {
    RunConfig c;
    c.params = make_params(k.d, k.gamma, k.alpha);
    c.V = {k.V};
    c.N = {k.N};
    c.p = k.p;
    c.backend = k.b;
    c.method = MethodChoice::both;
    const auto r = run_ok(c);
    const ResultRecord& ns = r[0];
    const ResultRecord& co = r[1];
    const double rel = std::abs(ns.gap - co.gap) / std::abs(ns.gap);
    worst = std::max(worst, rel);
    const bool good = co.zeros == k.d + 2 && rel <= 1e-6;
    if (!good)
      std::printf("  case d=%d gamma=%g alpha=%g V=%g N=%d p%d: zeros %d, relative gap difference %.2e\n", k.d,
                  k.gamma, k.alpha, k.V, k.N, k.p, co.zeros, rel);
    ok = ok && good;
    ++n;
  }
  return {ok, std::to_string(n) + " configurations: corrected path has d+2 null modes, paths agree to " +
                  fmt("%.2e", worst) + " (<= 1e-6)"};
}

Outcome c7() {
  bool ok = true;
  std::string s;
  for (int N : {4, 8})
    for (double gamma : {0.0, 1.0}) {
      RunConfig c;
      c.params = make_params(2, gamma, -1.0);
      c.V = {4.0};
      c.N = {N};
      c.backend = BackendChoice::direct;
      c.tri_order = 7;
      const double gd = gap_of(c);
      c.backend = BackendChoice::grad;
      c.grad_representation = Representation::g;
      const double gg = gap_of(c);
      c.grad_representation = Representation::F;
      const double gf = gap_of(c);
      const double rel = std::abs(gd - gg) / gg;
      ok = ok && rel <= 0.05;
      s += " N=" + std::to_string(N) + fmt(" gamma=%g:", gamma) + fmt(" direct %.5f", gd) + fmt(" grad %.5f", gg) +
           fmt(" (%.2f%%)", 100 * rel) + fmt(" [grad F %.5f]", gf);
    }
  return {ok, "2d V=4 p0 direct vs grad within 5%:" + s};
}

Outcome c8() {
  const double l00 = maxwell_lambda(0, 0), l01 = maxwell_lambda(0, 1), l10 = maxwell_lambda(1, 0);
  const double l02 = maxwell_lambda(0, 2), l11 = maxwell_lambda(1, 1), l20 = maxwell_lambda(2, 0);
  const double mn = maxwell_min_nonzero();
  const bool ok = std::abs(l00) < 1e-12 && std::abs(l01) < 1e-12 && std::abs(l10) < 1e-12 &&
                  std::abs(l02 + 0.5) < 1e-10 && std::abs(l11 + 1.0 / 3) < 1e-10 &&
                  std::abs(l20 + 1.0 / 3) < 1e-10 && std::abs(mn - 1.0 / 3) < 1e-10;
  return {ok, fmt("lambda00 %.1e", l00) + fmt(" lambda01 %.1e", l01) + fmt(" lambda10 %.1e", l10) +
                  fmt(" lambda02 %.12f", l02) + fmt(" lambda11 %.12f", l11) + fmt(" lambda20 %.12f", l20) +
                  fmt(" min nonzero %.12f", mn)};
}

Outcome c9() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  auto pt = [&](int d) { return Point{U(rng), U(rng), d == 3 ? U(rng) : 0.0}; };
  double hs = 0.0, sym1 = 0.0, sym2 = 0.0, nu = 0.0, frame = 0.0, part = 0.0;

  const OperatorParams p3 = make_params(3, 1.0, -2.0);
  PlanarQuadrature quad;
  quad.closed_form = false;
  for (int i = 0; i < 100; ++i) {
    const Point v = pt(3), xi = pt(3);
    const double a = kernel_k2(v, xi, p3), b = kernel_k2(v, xi, p3, quad);
    hs = std::max(hs, std::abs(a - b) / std::abs(a));
  }
  for (const OperatorParams& p : {make_params(3, 0.5, -1.5), make_params(2, -0.5, -1.0), p3})
    for (int i = 0; i < 100; ++i) {
      const Point v = pt(p.d), xi = pt(p.d);
      const double a1 = kernel_k1(v, xi, p), b1 = kernel_k1(xi, v, p);
      const double a2 = kernel_k2(v, xi, p), b2 = kernel_k2(xi, v, p);
      sym1 = std::max(sym1, std::abs(a1 - b1) / std::max(std::abs(a1), 1e-300));
      sym2 = std::max(sym2, std::abs(a2 - b2) / std::max(std::abs(a2), 1e-300));
    }
  for (int d : {2, 3})
    for (double gamma : {-1.0, 0.0, 0.5, 1.0}) {
      const OperatorParams p = make_params(d, gamma, -1.0 - (d == 3));
      const NuProfile prof(p, 1.0, 0.5);
      const double ref = std::pow(2.0, gamma / 2) * std::tgamma((gamma + d) / 2) / std::tgamma(d / 2.0);
      nu = std::max(nu, std::abs(collision_frequency({0, 0, 0}, prof) - ref) / ref);
    }
  for (int d : {2, 3})
    for (int i = 0; i < 200; ++i) {
      const Point u = pt(d);
      const RotationFrame F = rotation_frame(u, d);
      double un = 0.0;
      for (int k = 0; k < d; ++k) un += u[k] * u[k];
      un = std::sqrt(un);
      for (int r = 0; r < d; ++r) {
        double au = 0.0;
        for (int k = 0; k < d; ++k) au += F.A[r][k] * u[k];
        frame = std::max(frame, std::abs(au - (r == d - 1 ? un : 0.0)) / un);
        for (int s = 0; s < d; ++s) {
          double dot = 0.0;
          for (int k = 0; k < d; ++k) dot += F.A[r][k] * F.A[s][k];
          frame = std::max(frame, std::abs(dot - (r == s)));
        }
      }
    }
  std::uniform_real_distribution<double> Th(0.01, std::numbers::pi - 0.01);
  for (int d : {2, 3}) {
    const Mesh mesh(3.0, 6, d);
    for (int i = 0; i < 50; ++i) {
      const Point v = pt(d), u = pt(d);
      const std::optional<double> polar = d == 3 ? std::optional<double>(Th(rng)) : std::nullopt;
      double sum = 0.0;
      for (int m = 0; m < mesh.cells(); ++m) sum += target_intervals(mesh, v, u, m, polar).measure();
      part = std::max(part, std::abs(sum - domain_intervals(mesh, v, u, polar).measure()));
    }
  }
  const bool ok = hs <= 1e-8 && sym1 <= 1e-10 && sym2 <= 1e-10 && nu <= 1e-6 && frame <= 1e-12 && part <= 1e-10;
  return {ok, fmt("k2 quadrature vs closed form %.1e (1e-8)", hs) + fmt(", k1 symmetry %.1e", sym1) +
                  fmt(", k2 symmetry %.1e (1e-10)", sym2) + fmt(", nu(0) %.1e (1e-6)", nu) +
                  fmt(", frames %.1e (1e-12)", frame) + fmt(", interval partition %.1e (1e-10)", part)};
}

Outcome c10() {
  const auto t0 = std::chrono::steady_clock::now();
  // fixed element width dv = 2 so that N stays within 10
  std::map<std::pair<double, int>, double> gap;
  for (double gamma : {0.0, -1.0})
    for (int V : {4, 6}) {
      RunConfig c;
      c.params = make_params(3, gamma, 0.0);
      c.V = {double(V)};
      c.fixed_dv = 2.0;
      c.backend = BackendChoice::direct;
      c.threads = 0;
      gap[{gamma, V}] = gap_of(c);
    }
  const double g0 = gap[{0.0, 4}], g0b = gap[{0.0, 6}];
  const double s0 = gap[{-1.0, 4}], s1 = gap[{-1.0, 6}];
  const double change = std::abs(g0b - g0) / g0;
  const double drop = (s0 - s1) / s0;
  const bool ok = g0b > 0.0 && change < 0.2 && drop > 0.3;
  return {ok, fmt("3d alpha=0 dv=2: gamma=0 gaps %.4f", g0) + fmt(" -> %.4f", g0b) +
                  fmt(" (change %.1f%% < 20%%)", 100 * change) + fmt(", gamma=-1 gaps %.4f", s0) +
                  fmt(" -> %.4f", s1) + fmt(" (drop %.1f%% > 30%%), ", 100 * drop) + fmt("%.0f s", elapsed(t0))};
}

Outcome c11() {
  std::vector<double> gaps;
  for (int w : {1, 4, 16}) {
    RunConfig c = maxwell2d();
    c.threads = w;
    gaps.push_back(gap_of(c));
  }
  const bool ok = gaps[0] == gaps[1] && gaps[0] == gaps[2];
  char buf[160];
  std::snprintf(buf, sizeof buf, "criterion-1 gap with 1/4/16 workers: %.17g %.17g %.17g", gaps[0], gaps[1], gaps[2]);
  return {ok, buf};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> checks{{1, c1}, {2, c2}, {3, c3}, {4, c4},   {5, c5},  {6, c6},
                                                       {7, c7}, {8, c8}, {9, c9}, {10, c10}, {11, c11}};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (const auto& [k, f] : checks) which.push_back(k);
  int failed = 0;
  for (int k : which) {
    const auto it = checks.find(k);
    if (it == checks.end()) {
      std::printf("criterion %d: unknown\n", k);
      return 2;
    }
    Outcome o{false, ""};
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %d: %s %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
