#pragma once

// Maxwellian, angular cross-section b and the collision frequency nu(v).

#include <cmath>
#include <numbers>
#include <vector>

#include "boltzgap/mesh.hpp"

namespace boltzgap {

inline double norm2(const Point& v, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += v[i] * v[i];
  return s;
}

inline double maxwellian(const Point& v, int d) {
  const double c = d == 2 ? 1.0 / (2.0 * std::numbers::pi) : std::pow(2.0 * std::numbers::pi, -1.5);
  return c * std::exp(-0.5 * norm2(v, d));
}

/// b(cos theta) = amplitude * sin^{-(d-1)-alpha}(theta/2).
struct CrossSection {
  OperatorParams params;
  double amplitude = 0.0;

  double exponent() const { return -(params.d - 1) - params.alpha; }
  /// Integral of b over the unit sphere; finite only for alpha < 0.
  double sphere_integral() const;
  bool constant() const { return exponent() == 0.0; }
};

/// Raw amplitude 1/(2^{d-1} pi), or the normalizing constant when params.b_normalized.
CrossSection make_cross_section(const OperatorParams& params);

/// Sphere integral of sin^{-(d-1)-alpha}(theta/2) (unit amplitude), alpha < 0.
double sphere_integral_unit_b(int d, double alpha);

double cross_section_b(double cos_theta, const CrossSection& cs);

/// b as a function of s = sin(theta/2), without the theta = 0 check.
inline double cross_section_b_half(double s_half, const CrossSection& cs) {
  const double e = cs.exponent();
  return e == 0.0 ? cs.amplitude : cs.amplitude * std::pow(s_half, e);
}

/// Radially tabulated collision frequency (cubic interpolation, direct
/// quadrature below r_direct).
class NuProfile {
 public:
  NuProfile() = default;
  NuProfile(const OperatorParams& params, double r_max, double r_direct, int samples = 1024);

  double operator()(double r) const;
  double direct(double r) const;
  const OperatorParams& params() const { return params_; }
  double r_max() const { return r_max_; }
  double scale() const { return scale_; }

 private:
  OperatorParams params_;
  double scale_ = 1.0;  // sphere integral of b
  double r_max_ = 0.0;
  double r_direct_ = 0.0;
  double h_ = 0.0;
  std::vector<double> table_;
};

/// Profile covering the mesh [-V, V)^d; direct evaluation below 2 dv.
NuProfile make_nu_profile(const OperatorParams& params, const Mesh& mesh);

double collision_frequency(const Point& v, const NuProfile& nu);

/// Closed form nu(0) / (sphere integral of b) = 2^{g/2} Gamma((g+d)/2) / Gamma(d/2).
double nu_at_origin_closed_form(int d, double gamma);

}  // namespace boltzgap
