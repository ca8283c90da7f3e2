#pragma once

// Direct assembly of the g-representation collision matrix from the
// Dirichlet form, with sphere integrals for every post-collisional target:
//   G(j, j') = -(1/|E|) sum over cell pairs of
//              int int mu(v) mu(v - u) |u|^gamma psi_j(v) [g_j'(v, u) + g_j'(v - u, -u)] dv du.

#include <array>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "boltzgap/collision_matrix.hpp"
#include "boltzgap/kernels.hpp"
#include "boltzgap/sphere.hpp"

namespace boltzgap {

/// Pair-of-triangles rule on the unit square of (s, t) = per-axis offsets of
/// v and v_* inside their cells. The diagonal s = t (where u_i is stationary)
/// is the common edge of the two triangles, so no node sits on it.
struct TriangleRule {
  int points = 3;                               // per triangle: 1, 3, 6 or 7
  std::vector<std::array<double, 2>> nodes;     // (s, t)
  std::vector<double> weights;                  // sum to 1
  std::vector<int> swapped;                     // index of (t, s)
  std::vector<int> reflected;                   // index of (1 - s, 1 - t)
};

TriangleRule make_triangle_rule(int points_per_triangle);

struct DirectSettings {
  int tri_order = 3;
  AngularOptions angular;
  double prune = 1e-16;  // skip cell pairs with mu(v) mu(v_*) below this at every node
  int threads = 1;
  double memory_budget = default_memory_budget;
};

class DirectAssembler : public RowAssembler {
 public:
  DirectAssembler(const Mesh& mesh, const BasisSpec& basis, const OperatorParams& params,
                  const DirectSettings& settings = {});

  const Mesh& mesh() const override { return mesh_; }
  const BasisSpec& basis() const override { return basis_; }
  const OperatorParams& params() const override { return params_; }
  Representation representation() const override { return Representation::g; }
  Backend backend() const override { return Backend::direct; }
  void row_strip(int cell, Eigen::Ref<Eigen::MatrixXd> strip, AssemblyDiagnostics& diag) const override;

  /// Number of distinct cached angular sweeps so far.
  std::size_t cached_sweeps() const;

 private:
  // Angular sweeps depend on the node offsets inside the source cells and on
  // the cell offset only, so they are computed once on a relative lattice of
  // 2N-1 cells per axis, canonicalized under axis reflections, and shared.
  struct Target {
    std::int8_t delta[3];
    std::int8_t local;
    double value;
  };
  using Sweep = std::vector<Target>;
  const Sweep& lookup(std::uint64_t key, AssemblyDiagnostics& diag) const;
  std::uint64_t canonical(const Index3& delta, const Index3& node, int& flips) const;

  Mesh mesh_;
  BasisSpec basis_;
  OperatorParams params_;
  CrossSection cs_;
  DirectSettings settings_;
  TriangleRule rule_;
  Mesh lattice_;
  std::uint64_t serial_;
  mutable std::shared_mutex cache_mutex_;
  mutable std::unordered_map<std::uint64_t, std::unique_ptr<const Sweep>> cache_;
};

CollisionMatrix assemble_direct(const Mesh& mesh, const BasisSpec& basis, const OperatorParams& params,
                                const DirectSettings& settings = {});

}  // namespace boltzgap
