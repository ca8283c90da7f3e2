#include "boltzgap/kernels.hpp"

#include <algorithm>

#include "boltzgap/error.hpp"
#include "boltzgap/quadrature.hpp"
#include "special.hpp"

namespace boltzgap {

namespace {
constexpr double pi = std::numbers::pi;
}

double sphere_integral_unit_b(int d, double alpha) {
  require(alpha < 0.0, ErrorCode::not_applicable, "sphere integral of b diverges for alpha >= 0");
  if (d == 3) return 8.0 * pi / (-alpha);
  return 2.0 * std::sqrt(pi) * std::tgamma(-alpha / 2.0) / std::tgamma((1.0 - alpha) / 2.0);
}

double CrossSection::sphere_integral() const { return amplitude * sphere_integral_unit_b(params.d, params.alpha); }

CrossSection make_cross_section(const OperatorParams& params) {
  params.validate();
  CrossSection cs;
  cs.params = params;
  if (params.b_normalized)
    cs.amplitude = 1.0 / sphere_integral_unit_b(params.d, params.alpha);
  else
    cs.amplitude = 1.0 / (std::pow(2.0, params.d - 1) * pi);
  return cs;
}

double cross_section_b(double cos_theta, const CrossSection& cs) {
  require(cos_theta >= -1.0 && cos_theta <= 1.0, ErrorCode::invalid_argument, "cos(theta) outside [-1, 1]");
  const double e = cs.exponent();
  if (e == 0.0) return cs.amplitude;
  const double s = std::sqrt(std::max(0.0, (1.0 - cos_theta) / 2.0));
  if (e < 0.0 && s == 0.0) fail(ErrorCode::singular_evaluation, "b is singular at theta = 0");
  return cs.amplitude * std::pow(s, e);
}

double nu_at_origin_closed_form(int d, double gamma) {
  return std::pow(2.0, gamma / 2.0) * std::tgamma((gamma + d) / 2.0) / std::tgamma(d / 2.0);
}

namespace {

// Density of |v - v*| for v* standard normal and |v| = r (noncentral chi, d dof).
double relative_speed_density(double rho, double r, int d) {
  if (d == 2) return rho * std::exp(-0.5 * (rho - r) * (rho - r)) * detail::bessel_i0e(rho * r);
  const double c = std::sqrt(2.0 / pi);
  if (r < 1e-12) return c * rho * rho * std::exp(-0.5 * rho * rho);
  return c * rho * std::exp(-0.5 * (rho - r) * (rho - r)) * (-std::expm1(-2.0 * rho * r)) / (2.0 * r);
}

// E[|v - v*|^gamma] for |v| = r.
double radial_moment(double r, int d, double gamma) {
  if (gamma == 0.0) return 1.0;
  const double a = gamma + d - 1.0;  // rho^a behaviour at the origin
  const double rho1 = 1.0;
  quad::AdaptiveOptions opt;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 1e-12;
  // [0, rho1] in x = rho^{a+1}, which removes the power singularity
  auto inner = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double rho = std::pow(x, 1.0 / (a + 1.0));
    const double f = relative_speed_density(rho, r, d) / std::pow(rho, d - 1.0);
    // rho^gamma f drho = rho^a (f / rho^{d-1}) drho = (f / rho^{d-1}) dx / (a+1)
    return f / (a + 1.0);
  };
  double total = quad::integrate(inner, 0.0, std::pow(rho1, a + 1.0), opt).value;
  auto outer = [&](double rho) { return std::pow(rho, gamma) * relative_speed_density(rho, r, d); };
  std::vector<double> breaks{rho1};
  if (r - 8.0 > rho1) breaks.push_back(r - 8.0);
  if (r > rho1) breaks.push_back(r);
  breaks.push_back(std::max(rho1, r) + 12.0);
  total += quad::integrate_panels(outer, breaks, opt).value;
  return total;
}

}  // namespace

NuProfile::NuProfile(const OperatorParams& params, double r_max, double r_direct, int samples)
    : params_(params), r_max_(r_max), r_direct_(r_direct) {
  require(params.integrable(), ErrorCode::not_applicable, "collision frequency requires alpha < 0");
  require(samples >= 4 && r_max > 0.0, ErrorCode::invalid_argument, "bad collision frequency table");
  scale_ = make_cross_section(params).sphere_integral();
  h_ = r_max / (samples - 1);
  table_.resize(samples + 2);
  // one extra sample on each side keeps the cubic stencil centred
  for (int i = 0; i < samples + 2; ++i) table_[i] = radial_moment(std::abs((i - 1) * h_), params.d, params.gamma);
}

double NuProfile::direct(double r) const { return scale_ * radial_moment(r, params_.d, params_.gamma); }

double NuProfile::operator()(double r) const {
  if (params_.gamma == 0.0) return scale_;
  if (r < r_direct_ || r > r_max_) return direct(r);
  // table_[j] holds r = (j-1) h; the stencil j0..j0+3 brackets r in its middle interval
  const double x = r / h_;
  const int j0 = std::clamp(static_cast<int>(std::floor(x)), 0, static_cast<int>(table_.size()) - 4);
  const double s = x - (j0 - 1);
  const double f0 = table_[j0], f1 = table_[j0 + 1], f2 = table_[j0 + 2], f3 = table_[j0 + 3];
  const double l0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  const double l1 = s * (s - 2) * (s - 3) / 2.0;
  const double l2 = -s * (s - 1) * (s - 3) / 2.0;
  const double l3 = s * (s - 1) * (s - 2) / 6.0;
  return scale_ * (l0 * f0 + l1 * f1 + l2 * f2 + l3 * f3);
}

NuProfile make_nu_profile(const OperatorParams& params, const Mesh& mesh) {
  return NuProfile(params, std::sqrt(static_cast<double>(mesh.d())) * mesh.V() * 1.001, 2.0 * mesh.dv());
}

double collision_frequency(const Point& v, const NuProfile& nu) {
  return nu(std::sqrt(norm2(v, nu.params().d)));
}

}  // namespace boltzgap
