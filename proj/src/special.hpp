#pragma once

namespace boltzgap::detail {

/// Exponentially scaled modified Bessel function exp(-|x|) I0(x).
double bessel_i0e(double x);

/// Unregularized incomplete beta integral B(x; a, b) = int_0^x t^{a-1} (1-t)^{b-1} dt.
double beta_incomplete(double a, double b, double x);

}  // namespace boltzgap::detail
