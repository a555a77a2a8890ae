#pragma once

#include <functional>

#include "msl/special.hpp"

namespace msl {

using RealToComplex = std::function<cplx(double)>;

struct QuadResult {
    cplx value;
    double error = 0.0;
    long evaluations = 0;
};

// Fixed 20-point Gauss–Legendre on each of `panels` equal subintervals.
cplx gauss_composite(const RealToComplex &f, double a, double b, int panels);

// Recursive bisection driven by a 20-point rule against its two halves.
// Stops on a panel when |coarse − fine| ≤ max(abs_tol, rel_tol·|fine|)
// (tolerances scaled by the panel's share of the interval). Past max_evals
// no panel is split further; `error` then carries the unresolved part.
QuadResult integrate_adaptive(const RealToComplex &f, double a, double b,
                              double abs_tol, double rel_tol,
                              int max_depth = 40, long max_evals = 50000);

} // namespace msl
