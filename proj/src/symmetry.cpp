#include "boltzgap/symmetry.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <map>

#include "boltzgap/error.hpp"
#include "boltzgap/parallel.hpp"

namespace boltzgap {

ReflectionSectors::ReflectionSectors(const Mesh& mesh, const BasisSpec& basis, bool enabled) {
  const int d = mesh.d(), N = mesh.N(), nl = basis.n_local();
  group_ = enabled ? 1 << d : 1;
  functions_.resize(group_);
  for (int c = 0; c < mesh.cells(); ++c) {
    const Index3 k = mesh.multi(c);
    bool rep = true;
    if (enabled)
      for (int i = 0; i < d; ++i) rep = rep && k[i] <= N - 1 - k[i];
    if (rep) rep_cells_.push_back(c);
  }
  rows_.resize(rep_cells_.size());
  for (std::size_t ri = 0; ri < rep_cells_.size(); ++ri) {
    const int c = rep_cells_[ri];
    const Index3 k = mesh.multi(c);
    for (int l = 0; l < nl; ++l) {
      for (int s = 0; s < group_; ++s) {
        std::map<int, double> acc;
        for (int g = 0; g < group_; ++g) {
          Index3 kg = k;
          for (int i = 0; i < d; ++i)
            if (g >> i & 1) kg[i] = N - 1 - k[i];
          const double chi = (std::popcount(static_cast<unsigned>(s & g)) & 1) ? -1.0 : 1.0;
          const double sigma = (l > 0 && (g >> (l - 1) & 1)) ? -1.0 : 1.0;
          acc[global_index(mesh.flat(kg), l, basis)] += chi * sigma;
        }
        double n2 = 0.0;
        for (const auto& [idx, v] : acc) n2 += v * v;
        if (n2 < 0.5) continue;  // entries are integers; zero means the function is absent here
        const double n = std::sqrt(n2);
        Function f;
        f.cell = c;
        f.local = l;
        f.row_scale = group_ / n;
        for (const auto& [idx, v] : acc)
          if (v != 0.0) f.vec.emplace_back(idx, v / n);
        rows_[ri].emplace_back(s, static_cast<int>(functions_[s].size()));
        functions_[s].push_back(std::move(f));
      }
    }
  }
}

namespace {

Eigen::MatrixXd project_vector_rows(const Eigen::MatrixXd& C, const std::vector<ReflectionSectors::Function>& fs) {
  Eigen::MatrixXd out(C.rows(), static_cast<Eigen::Index>(fs.size()));
  for (std::size_t b = 0; b < fs.size(); ++b)
    for (Eigen::Index r = 0; r < C.rows(); ++r) {
      double s = 0.0;
      for (const auto& [idx, c] : fs[b].vec) s += c * C(r, idx);
      out(r, static_cast<Eigen::Index>(b)) = s;
    }
  return out;
}

// Keeps the constraint rows that survive in this sector.
Eigen::MatrixXd sector_constraints(const Eigen::MatrixXd& C, const std::vector<ReflectionSectors::Function>& fs) {
  const Eigen::MatrixXd P = project_vector_rows(C, fs);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < C.rows(); ++r)
    if (P.row(r).norm() > 1e-10 * C.row(r).norm()) keep.push_back(r);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(keep.size()), P.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = P.row(keep[i]);
  return out;
}

Eigen::MatrixXd sector_mass(const BlockDiagonal& D, const std::vector<ReflectionSectors::Function>& fs) {
  const Eigen::Index n = static_cast<Eigen::Index>(fs.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n && fs[b].cell == fs[a].cell; ++b) {
      double s = 0.0;
      for (const auto& [i, ci] : fs[a].vec)
        for (const auto& [j, cj] : fs[b].vec)
          if (i / D.block == j / D.block) s += ci * cj * D(i, j);
      out(a, b) = out(b, a) = s;
    }
  return out;
}

void fill_rows(const Eigen::Ref<const Eigen::MatrixXd>& strip, const ReflectionSectors& sym, int rep_index,
               std::vector<Eigen::MatrixXd>& G) {
  for (const auto& [s, row] : sym.rows_of(rep_index)) {
    const auto& fs = sym.functions(s);
    const auto& fa = fs[row];
    for (std::size_t b = 0; b < fs.size(); ++b) {
      double acc = 0.0;
      for (const auto& [idx, c] : fs[b].vec) acc += c * strip(fa.local, idx);
      G[s](row, static_cast<Eigen::Index>(b)) = fa.row_scale * acc;
    }
  }
}

SectoredProblem finish(std::vector<Eigen::MatrixXd>&& G, const ReflectionSectors& sym, const ConstraintSet& cs,
                       int d) {
  SectoredProblem out;
  out.d = d;
  for (int s = 0; s < sym.sectors(); ++s) {
    ReducedProblem p;
    out.diagnostics.max_asymmetry =
        std::max(out.diagnostics.max_asymmetry, G[s].size() ? (G[s] - G[s].transpose()).cwiseAbs().maxCoeff() : 0.0);
    p.G = 0.5 * (G[s] + G[s].transpose());
    G[s].resize(0, 0);
    p.D = sector_mass(cs.D, sym.functions(s));
    p.C = sector_constraints(cs.C, sym.functions(s));
    out.sectors.push_back(std::move(p));
  }
  return out;
}

}  // namespace

SectoredProblem assemble_sectors(const RowAssembler& asmb, const ReflectionSectors& sym, const ConstraintSet& cs,
                                 int threads) {
  require(asmb.representation() == cs.representation, ErrorCode::representation_mismatch,
          "assembler and constraints use different representations");
  const Mesh& mesh = asmb.mesh();
  const BasisSpec& basis = asmb.basis();
  const int M = basis_size(mesh, basis);
  const int nl = basis.n_local();
  std::vector<Eigen::MatrixXd> G(sym.sectors());
  double bytes = 0.0;
  for (int s = 0; s < sym.sectors(); ++s) bytes += 8.0 * std::pow(static_cast<double>(sym.functions(s).size()), 2);
  require(bytes <= default_memory_budget, ErrorCode::memory_budget, "sector matrices exceed the memory budget");
  for (int s = 0; s < sym.sectors(); ++s) {
    const auto n = static_cast<Eigen::Index>(sym.functions(s).size());
    G[s] = Eigen::MatrixXd::Zero(n, n);
  }
  const int reps = static_cast<int>(sym.rep_cells().size());
  std::vector<AssemblyDiagnostics> diag(reps);
  std::vector<double> diag_max(reps, 0.0);
  parallel_for(reps, resolve_threads(threads), [&](int ri) {
    const int c = sym.rep_cells()[ri];
    Eigen::MatrixXd strip = Eigen::MatrixXd::Zero(nl, M);
    asmb.row_strip(c, strip, diag[ri]);
    for (int l = 0; l < nl; ++l) diag_max[ri] = std::max(diag_max[ri], std::abs(strip(l, c * nl + l)));
    fill_rows(strip, sym, ri, G);
  });
  SectoredProblem out = finish(std::move(G), sym, cs, mesh.d());
  for (int ri = 0; ri < reps; ++ri) {
    out.diagnostics.merge(diag[ri]);
    out.g_norm = std::max(out.g_norm, diag_max[ri]);
  }
  return out;
}

SectoredProblem project_sectors(const CollisionMatrix& G, const ReflectionSectors& sym, const ConstraintSet& cs) {
  const int nl = G.p == 0 ? 1 : G.params.d + 1;
  std::vector<Eigen::MatrixXd> Gs(sym.sectors());
  for (int s = 0; s < sym.sectors(); ++s) {
    const auto n = static_cast<Eigen::Index>(sym.functions(s).size());
    Gs[s] = Eigen::MatrixXd::Zero(n, n);
  }
  for (std::size_t ri = 0; ri < sym.rep_cells().size(); ++ri) {
    const int c = sym.rep_cells()[ri];
    fill_rows(G.entries.middleRows(c * nl, nl), sym, static_cast<int>(ri), Gs);
  }
  SectoredProblem out = finish(std::move(Gs), sym, cs, G.params.d);
  out.g_norm = G.norm();
  return out;
}

SpectralResult sectored_gap(const SectoredProblem& prob, GapMethod method, const EigenOptions& opt,
                            double zero_tol_rel) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> all;
  for (const auto& p : prob.sectors) {
    if (p.G.rows() == 0) continue;
    const std::vector<double> ev = problem_eigenvalues(p, method, opt);
    all.insert(all.end(), ev.begin(), ev.end());
  }
  SpectralResult res = summarize_spectrum(std::move(all), method, prob.d, zero_tol_rel * prob.g_norm);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace boltzgap
