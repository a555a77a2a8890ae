#pragma once

#include <complex>
#include <numbers>

namespace msl {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// log Γ(x) for x > 0.
double log_gamma(double x);
// Γ(x) for x > 0, overflowing to +inf past x ≈ 171.
double gamma_fn(double x);
// Γ(x)/Γ(y) for positive x, y, evaluated in log space.
double gamma_ratio(double x, double y);

// Principal branch z^p for real p; 0^p = 0 for p > 0.
cplx cpow(cplx z, double p);

// Angle reduced to [0, 2π).
double wrap_2pi(double theta);
// Angle reduced to (−π, π].
double wrap_pi(double theta);

} // namespace msl
