#include "msl/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

#include "msl/errors.hpp"

namespace msl {

namespace {

using rule = boost::math::quadrature::gauss<double, 20>;

cplx panel(const RealToComplex &f, double a, double b) {
    const auto &x = rule::abscissa();
    const auto &w = rule::weights();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    // Boost stores the non-negative half of the symmetric rule.
    cplx sum{0.0, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            sum += w[i] * f(mid);
            continue;
        }
        sum += w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
    }
    return half * sum;
}

struct Adaptive {
    const RealToComplex &f;
    double abs_tol;
    double rel_tol;
    double length;
    int max_depth;
    long max_evals;
    long evals = 0;
    double err = 0.0;

    cplx run(double a, double b, cplx whole, int depth) {
        const double m = 0.5 * (a + b);
        const cplx left = panel(f, a, m);
        const cplx right = panel(f, m, b);
        evals += 40;
        const cplx fine = left + right;
        const double diff = std::abs(fine - whole);
        const double share = (b - a) / length;
        if (diff <= std::max(abs_tol * share, rel_tol * std::abs(fine)) ||
            depth >= max_depth || evals >= max_evals) {
            err += diff;
            return fine;
        }
        return run(a, m, left, depth + 1) + run(m, b, right, depth + 1);
    }
};

} // namespace

cplx gauss_composite(const RealToComplex &f, double a, double b, int panels) {
    cplx sum{0.0, 0.0};
    const double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i)
        sum += panel(f, a + i * h, a + (i + 1) * h);
    return sum;
}

QuadResult integrate_adaptive(const RealToComplex &f, double a, double b,
                              double abs_tol, double rel_tol, int max_depth, long max_evals) {
    if (!(b > a))
        return {};
    Adaptive ad{f, abs_tol, rel_tol, b - a, max_depth, max_evals};
    const cplx whole = panel(f, a, b);
    ad.evals += 20;
    QuadResult out;
    out.value = ad.run(a, b, whole, 0);
    out.error = ad.err;
    out.evaluations = ad.evals;
    if (!std::isfinite(out.value.real()) || !std::isfinite(out.value.imag()))
        throw evaluation_error("non-finite integrand on [" + std::to_string(a) +
                               ", " + std::to_string(b) + "]");
    return out;
}

} // namespace msl
