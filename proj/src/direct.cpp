#include "boltzgap/direct.hpp"

#include <cmath>
#include <atomic>
#include <mutex>

#include "boltzgap/error.hpp"

namespace boltzgap {

namespace {

std::atomic<std::uint64_t> next_serial{1};

struct Bary {
  double l1, l2, l3, w;
};

std::vector<Bary> triangle_points(int n) {
  auto perm3 = [](double a, double b, double w) {
    return std::vector<Bary>{{a, b, b, w}, {b, a, b, w}, {b, b, a, w}};
  };
  std::vector<Bary> out;
  switch (n) {
    case 1:
      out.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0});
      break;
    case 3:
      out = perm3(2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
      break;
    case 6: {
      out = perm3(0.108103018168070, 0.445948490915965, 0.223381589678011);
      auto b = perm3(0.816847572980459, 0.091576213509771, 0.109951743655322);
      out.insert(out.end(), b.begin(), b.end());
      break;
    }
    case 7: {
      out.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225});
      auto a = perm3(0.059715871789770, 0.470142064105115, 0.132394152788506);
      auto b = perm3(0.797426985353087, 0.101286507323456, 0.125939180544827);
      out.insert(out.end(), a.begin(), a.end());
      out.insert(out.end(), b.begin(), b.end());
      break;
    }
    default:
      fail(ErrorCode::invalid_argument, "triangle rule order must be 1, 3, 6 or 7");
  }
  return out;
}

}  // namespace

TriangleRule make_triangle_rule(int points_per_triangle) {
  TriangleRule r;
  r.points = points_per_triangle;
  const std::vector<Bary> pts = triangle_points(points_per_triangle);
  // lower triangle (0,0),(1,0),(1,1) and upper triangle (0,0),(0,1),(1,1)
  for (int tri = 0; tri < 2; ++tri)
    for (const Bary& b : pts) {
      const double s = tri == 0 ? b.l2 + b.l3 : b.l3;
      const double t = tri == 0 ? b.l3 : b.l2 + b.l3;
      r.nodes.push_back({s, t});
      r.weights.push_back(0.5 * b.w);
    }
  auto find = [&](double s, double t) {
    for (std::size_t j = 0; j < r.nodes.size(); ++j)
      if (std::abs(r.nodes[j][0] - s) < 1e-12 && std::abs(r.nodes[j][1] - t) < 1e-12) return static_cast<int>(j);
    fail(ErrorCode::internal, "triangle rule is not symmetric");
  };
  for (const auto& n : r.nodes) {
    r.swapped.push_back(find(n[1], n[0]));
    r.reflected.push_back(find(1.0 - n[0], 1.0 - n[1]));
  }
  return r;
}

DirectAssembler::DirectAssembler(const Mesh& mesh, const BasisSpec& basis, const OperatorParams& params,
                                 const DirectSettings& settings)
    : mesh_(mesh),
      basis_(basis),
      params_(params),
      cs_(make_cross_section(params)),
      settings_(settings),
      rule_(make_triangle_rule(settings.tri_order)),
      lattice_((2 * mesh.N() - 1) * mesh.dv() / 2.0, 2 * mesh.N() - 1, mesh.d()),
      serial_(next_serial++) {
  params.validate();
  require(basis.d == mesh.d() && params.d == mesh.d(), ErrorCode::invalid_argument, "dimension mismatch");
  require(mesh.N() <= 100, ErrorCode::invalid_argument, "direct backend supports N <= 100");
}

std::size_t DirectAssembler::cached_sweeps() const {
  std::shared_lock lock(cache_mutex_);
  return cache_.size();
}

// Per axis code (delta + N - 1) * nodes + node; reflection maps (delta, node)
// to (-delta, reflected node) and is applied when that is smaller.
std::uint64_t DirectAssembler::canonical(const Index3& delta, const Index3& node, int& flips) const {
  const int N = mesh_.N();
  const std::uint64_t nq = rule_.nodes.size(), base = (2 * N - 1) * nq;
  std::uint64_t key = 0, scale = 1;
  flips = 0;
  for (int i = 0; i < mesh_.d(); ++i) {
    int dl = delta[i], a = node[i];
    const int ra = rule_.reflected[a];
    if (dl < 0 || (dl == 0 && ra < a)) {
      dl = -dl;
      a = ra;
      flips |= 1 << i;
    }
    key += scale * (static_cast<std::uint64_t>(dl + N - 1) * nq + a);
    scale *= base;
  }
  return key;
}

const DirectAssembler::Sweep& DirectAssembler::lookup(std::uint64_t key, AssemblyDiagnostics& diag) const {
  {
    std::shared_lock lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  const int d = mesh_.d(), N = mesh_.N(), nl = basis_.n_local();
  const std::uint64_t nq = rule_.nodes.size(), base = (2 * N - 1) * nq;
  const double dv = mesh_.dv();
  Point v{}, u{};
  std::uint64_t rem = key;
  for (int i = 0; i < d; ++i) {
    const std::uint64_t code = rem % base;
    rem /= base;
    const int delta = static_cast<int>(code / nq) - (N - 1);
    const auto& st = rule_.nodes[code % nq];
    v[i] = lattice_.lower(N - 1) + dv * st[0];
    u[i] = dv * (st[0] - st[1] - delta);
  }
  auto out = std::make_unique<Sweep>();
  if (norm2(u, d) > 0.0) {
    thread_local std::unique_ptr<SphereSweep> sweep;
    thread_local std::uint64_t owner = 0;
    if (owner != serial_) {
      sweep = std::make_unique<SphereSweep>(lattice_, basis_, cs_, settings_.angular);
      owner = serial_;
    }
    const AngularStats before = sweep->stats();
    for (const auto& [idx, val] : sweep->run(v, u)) {
      const Index3 m = lattice_.multi(idx / nl);
      Target t{};
      for (int i = 0; i < d; ++i) t.delta[i] = static_cast<std::int8_t>(m[i] - (N - 1));
      t.local = static_cast<std::int8_t>(idx % nl);
      t.value = val;
      out->push_back(t);
    }
    const AngularStats& after = sweep->stats();
    diag.angular_integrals += after.integrals - before.integrals;
    diag.angular_failures += after.failures - before.failures;
    diag.max_angular_error = std::max(diag.max_angular_error, sweep->last_error());
  }
  std::unique_lock lock(cache_mutex_);
  auto [it, inserted] = cache_.try_emplace(key, std::move(out));
  return *it->second;
}

void DirectAssembler::row_strip(int cell, Eigen::Ref<Eigen::MatrixXd> strip, AssemblyDiagnostics& diag) const {
  const int d = mesh_.d(), N = mesh_.N(), nl = basis_.n_local();
  const double dv = mesh_.dv(), inv_vol = 1.0 / mesh_.volume();
  const Index3 k = mesh_.multi(cell);
  const Point wk = mesh_.center(k);
  const std::size_t nq = rule_.nodes.size();
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= nq;
  std::vector<Point> vs(total), vstar(total);
  std::vector<Index3> nodes(total);
  std::vector<double> ws(total);
  double phi[4];
  // adds -W phi_l(v) g(target) for a cached sweep seen from source cell `from`
  auto scatter = [&](const Sweep& sw, int flips, const Index3& from, double W) {
    for (const Target& t : sw) {
      Index3 m{};
      bool inside = true;
      double val = t.value;
      for (int i = 0; i < d; ++i) {
        const int dl = (flips >> i & 1) ? -t.delta[i] : t.delta[i];
        m[i] = from[i] + dl;
        inside = inside && m[i] >= 0 && m[i] < N;
      }
      if (!inside) continue;
      if (t.local > 0 && (flips >> (t.local - 1) & 1)) val = -val;
      const int col = global_index(mesh_.flat(m), t.local, basis_);
      for (int l = 0; l < nl; ++l) strip(l, col) -= W * phi[l] * val;
    }
  };
  for (int kb = 0; kb < mesh_.cells(); ++kb) {
    const Index3 m = mesh_.multi(kb);
    double max_weight = 0.0;
    for (std::size_t n = 0; n < total; ++n) {
      std::size_t rem = n;
      double w = 1.0;
      for (int i = 0; i < d; ++i) {
        const std::size_t a = rem % nq;
        rem /= nq;
        nodes[n][i] = static_cast<int>(a);
        vs[n][i] = mesh_.lower(k[i]) + dv * rule_.nodes[a][0];
        vstar[n][i] = mesh_.lower(m[i]) + dv * rule_.nodes[a][1];
        w *= dv * dv * rule_.weights[a];
      }
      ws[n] = w;
      max_weight = std::max(max_weight, maxwellian(vs[n], d) * maxwellian(vstar[n], d));
    }
    if (max_weight < settings_.prune) {
      ++diag.pruned_pairs;
      continue;
    }
    Index3 delta{}, back{};
    for (int i = 0; i < d; ++i) {
      delta[i] = m[i] - k[i];
      back[i] = -delta[i];
    }
    for (std::size_t n = 0; n < total; ++n) {
      const Point& v = vs[n];
      const Point& vst = vstar[n];
      Point u{};
      for (int i = 0; i < d; ++i) u[i] = v[i] - vst[i];
      const double un = std::sqrt(norm2(u, d));
      if (!(un > 0.0)) continue;
      const double W = ws[n] * maxwellian(v, d) * maxwellian(vst, d) * std::pow(un, params_.gamma) * inv_vol;
      for (int l = 0; l < nl; ++l) phi[l] = basis_value(l, v, wk, dv);
      int flips = 0;
      // g(v, u) seen from cell k
      const std::uint64_t key1 = canonical(delta, nodes[n], flips);
      scatter(lookup(key1, diag), flips, k, W);
      // g(v*, -u) seen from cell kb: the roles of s and t swap
      Index3 sw{};
      for (int i = 0; i < d; ++i) sw[i] = rule_.swapped[nodes[n][i]];
      const std::uint64_t key2 = canonical(back, sw, flips);
      scatter(lookup(key2, diag), flips, m, W);
    }
  }
}

CollisionMatrix assemble_direct(const Mesh& mesh, const BasisSpec& basis, const OperatorParams& params,
                                const DirectSettings& settings) {
  DirectAssembler asmb(mesh, basis, params, settings);
  return assemble_full(asmb, settings.threads, settings.memory_budget);
}

}  // namespace boltzgap
