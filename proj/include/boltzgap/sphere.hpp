#pragma once

// Angular integrals over the unit sphere of post-collisional basis values:
//   g_{m,l}(v, u) = int_S [phi_l chi_m(v') - phi_l chi_m(v)] b(u.sigma/|u|) dsigma,
// with v' = v + (|u| sigma - u)/2, for all target cells m at once.

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "boltzgap/kernels.hpp"
#include "boltzgap/mesh.hpp"

namespace boltzgap {

struct Interval {
  double lo, hi;  // [lo, hi)
};

/// Sorted, disjoint, nonempty subintervals of [0, 2 pi).
class IntervalSet {
 public:
  IntervalSet() = default;
  /// Normalizes: clips to [0, 2 pi), sorts, merges overlaps, drops empty pieces.
  explicit IntervalSet(std::vector<Interval> pieces);
  static IntervalSet full();

  const std::vector<Interval>& intervals() const { return iv_; }
  bool empty() const { return iv_.empty(); }
  double measure() const;
  bool contains(double x) const;
  IntervalSet intersect(const IntervalSet& o) const;

 private:
  std::vector<Interval> iv_;
};

/// {x in [0, 2 pi) : lo <= p + s cos(x - beta) < hi}, s >= 0.
IntervalSet band_set(double p, double s, double beta, double lo, double hi);

/// Orthogonal A with A u = |u| e_d. Rows are stored in A[0..d).
struct RotationFrame {
  int d = 3;
  std::array<std::array<double, 3>, 3> A{};
  Point u{};

  /// sigma = A^T s for local coordinates s.
  Point to_global(const Point& s) const;
};

RotationFrame rotation_frame(const Point& u, int d);
RotationFrame identity_frame(int d);

/// Angles with v' in cell: d = 2 gives theta with sigma = A^T (sin theta, cos theta);
/// d = 3 needs the polar angle and gives the azimuths phi of
/// sigma = A^T (sin theta cos phi, sin theta sin phi, cos theta). Without a frame
/// the parameterization is global (A = I).
IntervalSet target_intervals(const Mesh& mesh, const Point& v, const Point& u, int cell,
                             std::optional<double> polar = std::nullopt, const RotationFrame* frame = nullptr);

/// Same set for the whole domain [-V, V)^d.
IntervalSet domain_intervals(const Mesh& mesh, const Point& v, const Point& u, std::optional<double> polar = std::nullopt,
                             const RotationFrame* frame = nullptr);

/// int over sin(theta/2) < t0 of sin^2(theta/2) b dsigma. The first-order
/// cap contribution of a linear function phi is -(grad phi . u) times this.
double cap_integral(const CrossSection& cs, double t0);
/// int over sin(theta/2) > t0 of b dsigma; finite for t0 > 0 at every alpha < 2.
double tail_integral(const CrossSection& cs, double t0);

struct AngularOptions {
  double tol = 1e-7;        // relative to the loss magnitude outside the cancellation cap
  int max_intervals = 600;  // polar subintervals per sweep (d = 3) or per arc (d = 2)
};

struct AngularStats {
  std::int64_t integrals = 0;
  std::int64_t failures = 0;
  double max_error = 0.0;
};

/// Batched evaluation of g_{m,l}(v, u) over every cell. Works in the local
/// frame about u so that b depends on the polar angle only. The polar cap
/// theta <= theta0, on which v' stays in the cell of v, is integrated
/// analytically through the first-order expansion of the basis; this cancels
/// the grazing singularity and is exact for p <= 1. The azimuthal (d = 3) or
/// full (d = 2) angular dependence is integrated exactly over cell arcs.
/// Not thread-safe: one instance per worker.
class SphereSweep {
 public:
  SphereSweep(const Mesh& mesh, const BasisSpec& basis, const CrossSection& cs, const AngularOptions& opt = {});

  /// Entries (global index, value); valid until the next call. v must lie in the mesh.
  const std::vector<std::pair<int, double>>& run(const Point& v, const Point& u);

  /// Error estimate of the last call (absolute).
  double last_error() const { return last_error_; }
  bool last_converged() const { return last_converged_; }
  const AngularStats& stats() const { return stats_; }

 private:
  void add(int idx, double value);
  void sweep2(const Point& c, double r, const RotationFrame& F, double theta0);
  void sweep3(const Point& c, double r, const RotationFrame& F, double theta0, double scale);
  // One polar node: adds weight * ∫ phi dphi over all cell arcs into the scratch arrays.
  void polar_node(const Point& c, double r, const RotationFrame& F, double theta, double wk, double wg);
  double cap_integral(double t0) const;
  double loss_integral(double t0) const;

  Mesh mesh_;
  BasisSpec basis_;
  CrossSection cs_;
  AngularOptions opt_;
  std::vector<double> acc_, kr_, ga_;
  std::vector<char> used_, tmp_used_;
  std::vector<int> touched_, tmp_touched_;
  std::vector<std::pair<int, double>> out_;
  std::vector<double> cross_;
  double last_error_ = 0.0;
  bool last_converged_ = true;
  AngularStats stats_;
};

struct AngularValue {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// g_{m,l}(v, u) for one target cell and local function.
AngularValue angular_integral(const Point& v, const Point& u, int cell, int local, const CrossSection& cs,
                              const Mesh& mesh, const BasisSpec& basis, double tol = 1e-7);

}  // namespace boltzgap
