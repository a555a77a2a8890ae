#include "msl/laplace_eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "msl/errors.hpp"
#include "msl/quadrature.hpp"

namespace msl {

namespace {

bool is_zero(cplx z) { return z == cplx{0.0, 0.0}; }

GrowthEnvelope polynomial_growth(const TruncatedSeries &w, double R) {
    GrowthEnvelope g;
    if (w.is_zero())
        return g;
    const int deg = w.degree();
    for (int n = w.valuation(); n <= deg; ++n)
        g.C += std::abs(w.coeff(n)) * std::pow(R, n - deg);
    g.d = deg;
    return g;
}

ProblemSpec d_spec(const RationalKernel &rk) {
    ProblemSpec p;
    p.k = rk.k;
    p.s1 = rk.s1;
    p.a = rk.a;
    return p;
}

double root_test_z0(const std::vector<TruncatedSeries> &W, double rho) {
    const int n = static_cast<int>(W.size()) - 1;
    double z0 = 0.0;
    for (int b = std::max(1, n / 2); b <= n; ++b) {
        double a = 0.0;
        const auto &w = W[static_cast<std::size_t>(b)];
        for (int j = w.valuation(); j <= w.degree(); ++j)
            a += std::abs(w.coeff(j)) * std::pow(rho, j);
        if (a > 0)
            z0 = std::max(z0, std::exp((std::log(a) - log_gamma(b + 1.0)) / b));
    }
    return z0;
}

} // namespace

cplx laplace_monomial(int n, int k, cplx T) {
    return gamma_fn(static_cast<double>(n) / k) * std::pow(T, n);
}

LaplaceResult laplace_ray_numeric(const TauFunction &w, const RayQuadrature &rq, cplx T, int k, double tol,
                                  const GrowthEnvelope &growth, double scale) {
    if (is_zero(T))
        throw singular_parameter("T = 0");
    if (!(rq.R_max > 0))
        throw invalid_grid("R_max must be positive");
    const double margin = std::cos(k * (rq.gamma - std::arg(T)));
    if (!(rq.cone_margin > 0) || margin < rq.cone_margin) {
        std::ostringstream msg;
        msg << "cos(k(gamma - arg T)) = " << margin << " below the margin " << rq.cone_margin;
        throw cone_margin(msg.str());
    }
    const cplx dir = std::polar(1.0, rq.gamma);
    auto f = [&](double s) {
        const cplx u = s * dir;
        return static_cast<double>(k) * w(u) * std::exp(-std::pow(u / T, k)) / s;
    };

    // Past |T|(60/Δ)^{1/k} the exponential factor is below e^{-60}; that stretch
    // only gets a coarse rule.
    const double R = std::min(rq.R_max, std::abs(T) * std::pow(60.0 / margin, 1.0 / k));
    LaplaceResult out;
    int panels = std::max(1, static_cast<int>(std::ceil(R / (0.5 * std::abs(T)))));
    cplx prev = gauss_composite(f, 0.0, R, panels);
    for (;;) {
        panels *= 2;
        const cplx cur = gauss_composite(f, 0.0, R, panels);
        out.error = std::abs(cur - prev);
        prev = cur;
        if (out.error <= 0.25 * tol * std::max(std::abs(cur), scale))
            break;
        if (panels > rq.max_panels)
            throw tail_not_converged("ray quadrature did not settle within " + std::to_string(panels) +
                                     " panels");
    }
    out.value = prev;
    if (R < rq.R_max)
        out.value += gauss_composite(f, R, rq.R_max, 16);
    out.panels = panels;
    if (!std::isfinite(out.value.real()) || !std::isfinite(out.value.imag()))
        throw evaluation_error("non-finite Laplace integral");

    if (growth.C > 0) {
        const double Y = margin * std::pow(rq.R_max / std::abs(T), k);
        const double ak = growth.d / k;
        out.tail_bound = growth.C * std::pow(std::abs(T), growth.d) * std::pow(margin, -ak) *
                         boost::math::tgamma(ak, Y);
    }
    if (out.tail_bound > tol * std::max(std::abs(out.value), scale) && out.tail_bound > 0) {
        std::ostringstream msg;
        msg << "tail bound " << out.tail_bound << " exceeds tol * |value|; use a smaller |T| or a larger R_max";
        throw tail_not_converged(msg.str());
    }
    return out;
}

GrowthEnvelope RationalKernel::growth(double R) const {
    const SingularSet sing = singular_set();
    if (R < 2 * sing.pole_modulus)
        throw invalid_grid("R_max for a rational kernel must be at least twice the pole modulus");
    GrowthEnvelope g = polynomial_growth(numerator, R);
    if (g.C == 0)
        return g;
    const int n = k * s1;
    const double lead = std::pow(static_cast<double>(k), s1);
    const double q = std::pow(sing.pole_modulus / R, n);
    g.C /= std::pow(lead * (1 - q), power);
    g.d -= static_cast<double>(power) * n;
    if (g.d < 1) {
        g.C *= std::pow(R, g.d - 1);
        g.d = 1;
    }
    return g;
}

TruncatedSeries RationalKernel::taylor(int N) const {
    const TruncatedSeries inv = inverse_d_series(d_spec(*this), N);
    TruncatedSeries out = numerator.truncated(N);
    for (int i = 0; i < power; ++i)
        out = (out * inv).truncated(N);
    return out;
}

cplx eval_rational_kernel(const RationalKernel &rk, cplx tau) {
    for (cplx p : rk.singular_set().poles())
        if (std::abs(tau - p) < 1e-8) {
            std::ostringstream msg;
            msg << "tau = (" << tau.real() << ", " << tau.imag() << ") is within 1e-8 of a pole";
            throw pole_proximity(msg.str());
        }
    const cplx d = std::pow(static_cast<double>(rk.k) * std::pow(tau, rk.k), rk.s1) + rk.a;
    return rk.numerator(tau) / std::pow(d, rk.power);
}

cplx laplace_residue(const RationalKernel &rk, cplx T, cplx pole) {
    const double k = rk.k;
    if (rk.power == 1) {
        const cplx dprime = static_cast<double>(rk.s1) * std::pow(k * std::pow(pole, rk.k), rk.s1 - 1) * k * k *
                            std::pow(pole, rk.k - 1);
        return k * rk.numerator(pole) * std::exp(-std::pow(pole / T, rk.k)) / (pole * dprime);
    }
    double rho = std::abs(pole);
    for (cplx p : rk.singular_set().poles())
        if (p != pole)
            rho = std::min(rho, std::abs(p - pole));
    rho *= 0.25;
    constexpr int n = 512;
    cplx sum{0.0, 0.0};
    for (int j = 0; j < n; ++j) {
        const cplx e = std::polar(rho, 2 * pi * j / n);
        const cplx u = pole + e;
        sum += k * eval_rational_kernel(rk, u) * std::exp(-std::pow(u / T, rk.k)) / u * e;
    }
    return sum / static_cast<double>(n);
}

cplx crossed_residue_sum(const RationalKernel &rk, cplx T, double gamma1, double gamma2) {
    const double width = wrap_2pi(gamma2 - gamma1);
    cplx sum{0.0, 0.0};
    for (cplx p : rk.singular_set().poles()) {
        const double u = wrap_2pi(std::arg(p) - gamma1);
        if (u > angle_tol && u < width - angle_tol)
            sum += cplx{0.0, -2 * pi} * laplace_residue(rk, T, p);
    }
    return sum;
}

EvalResult eval_solution(const SolutionEvaluator &ev, cplx t, cplx z, cplx epsilon, EvalMode mode) {
    if (is_zero(epsilon))
        throw singular_parameter("epsilon = 0");
    if (ev.t_sector && !ev.t_sector->contains(t)) {
        std::ostringstream msg;
        msg << "t = (" << t.real() << ", " << t.imag() << ") lies outside the T-sector";
        throw geometry_error(msg.str());
    }
    const int k = ev.kernel ? ev.kernel->k : ev.spec.k;
    const cplx T = t * cpow(epsilon, ev.spec.r());
    EvalResult out;

    std::vector<TruncatedSeries> W;
    double pm;
    if (ev.kernel) {
        W.push_back(ev.kernel->taylor(ev.N_tau));
        pm = ev.kernel->singular_set().pole_modulus;
    } else {
        W = solve_recursion(ev.spec, ev.data, epsilon, ev.N_z, ev.N_tau).W;
        pm = ev.spec.pole_modulus();
    }
    const double R_taylor = std::min(ev.quad.R_max, 0.8 * pm);
    // Both modes only see W on the scale of |T|; the ray rule stops where the
    // Laplace weight falls below e^{-60}.
    double probe = 2 * std::abs(T);
    if (mode == EvalMode::ray_numeric) {
        const double margin = std::max(std::cos(k * (ev.quad.gamma - std::arg(T))), ev.quad.cone_margin);
        probe = std::abs(T) * std::pow(60.0 / margin, 1.0 / k);
    }
    const double z0 = root_test_z0(W, std::min(R_taylor, probe));
    if (z0 > 0)
        out.z_radius = 1.0 / (2 * z0);
    if (std::abs(z) >= out.z_radius) {
        std::ostringstream msg;
        msg << "|z| = " << std::abs(z) << " >= radius bound " << out.z_radius;
        throw divergent_z(msg.str());
    }

    const int top = is_zero(z) ? 0 : static_cast<int>(W.size()) - 1;
    cplx zpow{1.0, 0.0};
    double fact = 1.0;
    for (int b = 0; b <= top; ++b) {
        if (b > 0) {
            zpow *= z;
            fact *= b;
        }
        const TruncatedSeries &w = W[static_cast<std::size_t>(b)];
        cplx xb{0.0, 0.0};
        if (mode == EvalMode::termwise_exact) {
            double last = 0.0;
            for (int n = w.valuation(); n <= w.degree(); ++n) {
                const cplx term = w.coeff(n) * laplace_monomial(n, k, T);
                xb += term;
                last = std::abs(term);
            }
            out.truncation = std::max(out.truncation, last * std::abs(zpow) / fact);
        } else {
            if (w.is_zero())
                continue;
            RayQuadrature rq = ev.quad;
            LaplaceResult lr;
            // Later slices only need accuracy relative to the running sum.
            const double scale = b == 0 ? 0.0 : std::abs(out.value) * fact / std::abs(zpow);
            if (ev.kernel) {
                const RationalKernel &rk = *ev.kernel;
                lr = laplace_ray_numeric([&](cplx u) { return eval_rational_kernel(rk, u); }, rq, T, k, ev.tol,
                                         rk.growth(rq.R_max), scale);
            } else {
                rq.R_max = R_taylor;
                lr = laplace_ray_numeric([&](cplx u) { return w(u); }, rq, T, k, ev.tol,
                                         polynomial_growth(w, rq.R_max), scale);
            }
            xb = lr.value;
            out.tail_bound += lr.tail_bound * std::abs(zpow) / fact;
        }
        out.value += xb * zpow / fact;
        if (b == top && top > 0)
            out.truncation = std::max(out.truncation, std::abs(xb * zpow / fact));
    }
    return out;
}

DifferenceSeries adjacent_difference(const SolutionEvaluator &ev_i, const SolutionEvaluator &ev_ip1, cplx t,
                                     cplx z, std::span<const cplx> eps_grid) {
    const SingularSet sing = ev_i.kernel ? ev_i.kernel->singular_set()
                                         : singular_directions(ev_i.spec.k, ev_i.spec.s1, ev_i.spec.a);
    DifferenceSeries out;
    out.verdict = classify_rays(ev_i.gamma, ev_ip1.gamma, sing);
    for (cplx eps : eps_grid) {
        const cplx a = eval_solution(ev_i, t, z, eps, EvalMode::ray_numeric).value;
        const cplx b = eval_solution(ev_ip1, t, z, eps, EvalMode::ray_numeric).value;
        out.samples.push_back({eps, a, b, std::abs(b - a)});
    }
    return out;
}

std::string difference_csv(const DifferenceSeries &d) {
    std::ostringstream out;
    out.precision(17);
    out << "eps_modulus,diff_modulus,verdict\n";
    for (const auto &s : d.samples)
        out << std::abs(s.epsilon) << ',' << s.diff_modulus << ',' << to_string(d.verdict) << '\n';
    return out.str();
}

} // namespace msl
