#include "msl/special.hpp"

#include <cmath>

namespace msl {

double log_gamma(double x) {
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double gamma_fn(double x) {
    if (x < 170.0)
        return std::tgamma(x);
    return std::exp(log_gamma(x));
}

double gamma_ratio(double x, double y) {
    if (x < 170.0 && y < 170.0)
        return std::tgamma(x) / std::tgamma(y);
    return std::exp(log_gamma(x) - log_gamma(y));
}

cplx cpow(cplx z, double p) {
    if (z == cplx{0.0, 0.0})
        return p > 0 ? cplx{0.0, 0.0} : cplx{1.0, 0.0};
    return std::polar(std::pow(std::abs(z), p), p * std::arg(z));
}

double wrap_2pi(double theta) {
    double r = std::fmod(theta, 2 * pi);
    if (r < 0)
        r += 2 * pi;
    if (r >= 2 * pi)
        r -= 2 * pi;
    return r;
}

double wrap_pi(double theta) {
    double r = wrap_2pi(theta);
    return r > pi ? r - 2 * pi : r;
}

} // namespace msl
