#include "special.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_gamma.h>

#include <algorithm>

namespace boltzgap::detail {

namespace {
struct GslQuiet {
  GslQuiet() { gsl_set_error_handler_off(); }
};
const GslQuiet quiet;
}  // namespace

double bessel_i0e(double x) {
  gsl_sf_result r;
  gsl_sf_bessel_I0_scaled_e(x, &r);
  return r.val;
}

double beta_incomplete(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  gsl_sf_result r, B;
  gsl_sf_beta_inc_e(a, b, std::min(x, 1.0), &r);
  gsl_sf_beta_e(a, b, &B);
  return r.val * B.val;
}

}  // namespace boltzgap::detail
