#include "boltzgap/collision_matrix.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "boltzgap/error.hpp"
#include "boltzgap/parallel.hpp"

namespace boltzgap {

static_assert(std::endian::native == std::endian::little, "matrix dumps assume a little-endian host");

const char* to_string(Backend b) { return b == Backend::grad ? "grad" : "direct"; }

void AssemblyDiagnostics::merge(const AssemblyDiagnostics& o) {
  kernel_evaluations += o.kernel_evaluations;
  pruned_pairs += o.pruned_pairs;
  angular_integrals += o.angular_integrals;
  angular_failures += o.angular_failures;
  max_angular_error = std::max(max_angular_error, o.max_angular_error);
  max_asymmetry = std::max(max_asymmetry, o.max_asymmetry);
}

double CollisionMatrix::norm() const { return entries.size() ? entries.diagonal().cwiseAbs().maxCoeff() : 0.0; }

CollisionMatrix assemble_full(const RowAssembler& asmb, int threads, double budget_bytes) {
  const Mesh& mesh = asmb.mesh();
  const BasisSpec& basis = asmb.basis();
  const int M = basis_size(mesh, basis);
  const int nl = basis.n_local();
  require(static_cast<double>(M) * M * 8.0 <= budget_bytes, ErrorCode::memory_budget,
          "dense collision matrix of size " + std::to_string(M) + " exceeds the memory budget");
  CollisionMatrix G;
  G.entries = Eigen::MatrixXd::Zero(M, M);
  G.representation = asmb.representation();
  G.backend = asmb.backend();
  G.params = asmb.params();
  G.V = mesh.V();
  G.N = mesh.N();
  G.p = basis.p;
  std::vector<AssemblyDiagnostics> diag(mesh.cells());
  parallel_for(mesh.cells(), resolve_threads(threads), [&](int c) {
    Eigen::MatrixXd strip = Eigen::MatrixXd::Zero(nl, M);
    asmb.row_strip(c, strip, diag[c]);
    G.entries.middleRows(c * nl, nl) = strip;
  });
  for (const auto& d : diag) G.diagnostics.merge(d);
  G.diagnostics.max_asymmetry = (G.entries - G.entries.transpose()).cwiseAbs().maxCoeff();
  G.entries = 0.5 * (G.entries + G.entries.transpose()).eval();
  return G;
}

double quadratic_form(const CollisionMatrix& G, const CoefficientVector& x) {
  require(x.representation == G.representation, ErrorCode::representation_mismatch,
          "coefficient vector and collision matrix use different representations");
  require(x.values.size() == G.entries.rows(), ErrorCode::invalid_argument, "dimension mismatch in quadratic form");
  return x.values.dot(G.entries * x.values);
}

namespace {
struct DumpHeader {
  char magic[4];
  std::uint32_t version;
  std::int32_t d, N, p, representation, backend;
  std::uint32_t M;
};
static_assert(sizeof(DumpHeader) == 32);
}  // namespace

void write_matrix_dump(const std::string& path, const CollisionMatrix& G) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open " + path + " for writing");
  DumpHeader h{{'B', 'G', 'A', 'P'}, 1, G.params.d, G.N, G.p, static_cast<std::int32_t>(G.representation),
               static_cast<std::int32_t>(G.backend), static_cast<std::uint32_t>(G.size())};
  out.write(reinterpret_cast<const char*>(&h), sizeof h);
  std::vector<double> row(G.size());
  for (int i = 0; i < G.size(); ++i) {
    for (int j = 0; j < G.size(); ++j) row[j] = G.entries(i, j);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  require(static_cast<bool>(out), ErrorCode::io, "write failed for " + path);
}

CollisionMatrix read_matrix_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path);
  DumpHeader h{};
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  require(in && std::memcmp(h.magic, "BGAP", 4) == 0 && h.version == 1, ErrorCode::io, path + " is not a matrix dump");
  CollisionMatrix G;
  G.params.d = h.d;
  G.N = h.N;
  G.p = h.p;
  G.representation = static_cast<Representation>(h.representation);
  G.backend = static_cast<Backend>(h.backend);
  G.entries.resize(h.M, h.M);
  std::vector<double> row(h.M);
  for (std::uint32_t i = 0; i < h.M; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    require(static_cast<bool>(in), ErrorCode::io, "truncated matrix dump " + path);
    for (std::uint32_t j = 0; j < h.M; ++j) G.entries(i, j) = row[j];
  }
  return G;
}

}  // namespace boltzgap
