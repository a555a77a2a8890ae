#include "msl/borel_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "msl/errors.hpp"

namespace msl {

namespace {

double binomial(int n, int j) {
    double out = 1.0;
    for (int i = 1; i <= j; ++i)
        out = out * (n - j + i) / i;
    return out;
}

double factorial(int n) {
    double out = 1.0;
    for (int i = 2; i <= n; ++i)
        out *= i;
    return out;
}

// The Beta-kernel combination applied to W_{α₁+κ₁} by one term.
TruncatedSeries term_kernel(const ProblemSpec &spec, const Term &t, const OperatorExpansion *ex,
                            const TruncatedSeries &w) {
    TruncatedSeries out = kernel_op(w, t.delta, t.kappa0, spec.k);
    if (ex)
        for (int p = 1; p <= t.kappa0 - 1; ++p)
            out = out + scale(kernel_op(w, t.delta + spec.k * (t.kappa0 - p), p, spec.k), (*ex)[p]);
    return out;
}

std::vector<std::optional<OperatorExpansion>> expansions(const ProblemSpec &spec) {
    std::vector<std::optional<OperatorExpansion>> out;
    for (const auto &t : spec.terms)
        out.push_back(t.kappa0 >= 1 ? std::optional(expansion_constants(t.kappa0, spec.k)) : std::nullopt);
    return out;
}

} // namespace

std::pair<int, int> ProblemSpec::r_fraction() const {
    const int den = s1 * k;
    const int g = std::gcd(r1, den);
    return {r1 / g, den / g};
}

double ProblemSpec::pole_modulus() const {
    return std::pow(std::abs(a), 1.0 / (k * s1)) / std::pow(static_cast<double>(k), 1.0 / k);
}

cplx SectorData::b_coeff(int term, int beta, cplx eps) const {
    const auto it = b.find({term, beta});
    return it == b.end() ? cplx{0.0, 0.0} : it->second(eps);
}

int SectorData::max_beta() const {
    int m = -1;
    for (const auto &[key, _] : b)
        m = std::max(m, key.second);
    return m;
}

SpecReport validate_spec(const ProblemSpec &spec) {
    SpecReport out;
    auto fail = [&](std::string msg) {
        out.ok = false;
        out.violations.push_back(std::move(msg));
    };
    if (spec.k < 2)
        fail("k = " + std::to_string(spec.k) + " < 2");
    if (spec.s1 < 1)
        fail("s1 must be >= 1");
    if (spec.r1 < 1)
        fail("r1 must be >= 1");
    if (spec.S < 1)
        fail("S must be >= 1");
    if (spec.a == cplx{0.0, 0.0})
        fail("a must be nonzero");
    if (!(spec.sigma > 0))
        fail("sigma must be positive");
    if (!(spec.b_weight > 1))
        fail("b_weight must exceed 1");
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        const Term &t = spec.terms[i];
        const std::string tag = "term " + std::to_string(i) + " (s=" + std::to_string(t.s) +
                                ", kappa0=" + std::to_string(t.kappa0) + ", kappa1=" +
                                std::to_string(t.kappa1) + ", delta=" + std::to_string(t.delta) + "): ";
        if (t.kappa0 < 0 || t.kappa1 < 0)
            fail(tag + "negative derivative order");
        if (t.kappa1 >= spec.S)
            fail(tag + "kappa1 >= S");
        if (t.delta < spec.k)
            fail(tag + "delta < k");
        if (t.s != t.kappa0 * (spec.k + 1) + t.delta)
            fail(tag + "s != kappa0*(k+1) + delta");
    }
    return out;
}

SpecReport validate_spec(const ProblemSpec &spec, const SectorData &data) {
    SpecReport out = validate_spec(spec);
    auto fail = [&](std::string msg) {
        out.ok = false;
        out.violations.push_back(std::move(msg));
    };
    if (static_cast<int>(data.init.size()) != spec.S)
        fail("sector " + std::to_string(data.index) + ": expected " + std::to_string(spec.S) +
             " initial series, got " + std::to_string(data.init.size()));
    for (std::size_t j = 0; j < data.init.size(); ++j) {
        const auto &s = data.init[j].series;
        if (s.var() != Var::tau)
            fail("initial series " + std::to_string(j) + " is not in tau");
        if (s.effective_valuation() < 1)
            fail("initial series " + std::to_string(j) + " has a constant term");
    }
    for (const auto &[key, expr] : data.b) {
        if (key.first < 0 || key.first >= static_cast<int>(spec.terms.size()))
            fail("b coefficient for unknown term " + std::to_string(key.first));
        if (key.second < 0)
            fail("b coefficient with negative beta");
        if (key.second == 0 && !expr.is_zero())
            fail("b coefficient of term " + std::to_string(key.first) + " at beta = 0 must vanish");
    }
    return out;
}

TruncatedSeries inverse_d_series(const ProblemSpec &spec, int N) {
    if (spec.a == cplx{0.0, 0.0})
        throw invalid_coefficient("a must be nonzero");
    std::vector<cplx> dense(static_cast<std::size_t>(N + 1));
    const int step = spec.k * spec.s1;
    const cplx ratio = -std::pow(static_cast<double>(spec.k), spec.s1) / spec.a;
    cplx c = 1.0 / spec.a;
    for (int n = 0; n <= N; n += step, c *= ratio)
        dense[static_cast<std::size_t>(n)] = c;
    return TruncatedSeries::from_dense(Var::tau, std::move(dense), N);
}

TruncatedSeries d_polynomial(const ProblemSpec &spec, int N) {
    std::vector<cplx> dense(static_cast<std::size_t>(std::max(N, spec.k * spec.s1) + 1));
    dense[0] = spec.a;
    dense[static_cast<std::size_t>(spec.k * spec.s1)] += std::pow(static_cast<double>(spec.k), spec.s1);
    return TruncatedSeries::from_dense(Var::tau, std::move(dense), N);
}

int default_n_tau(const ProblemSpec &spec, double rho0) {
    const double q = rho0 / spec.pole_modulus();
    if (!(q > 0) || q >= 1)
        throw invalid_grid("rho0 must lie inside the pole disc");
    const double order = std::log(std::numeric_limits<double>::epsilon()) / std::log(q);
    return std::clamp(static_cast<int>(std::floor(0.5 * order)), 4, 400);
}

cplx eps_power_neg_r(const ProblemSpec &spec, cplx eps, int m) {
    const cplx root = cpow(eps, 1.0 / (spec.s1 * spec.k));
    return std::pow(root, -spec.r1 * m);
}

BorelSolution solve_recursion(const ProblemSpec &spec, const SectorData &data, cplx epsilon, int N_z,
                              int N_tau) {
    if (epsilon == cplx{0.0, 0.0})
        throw singular_parameter("epsilon = 0");
    if (N_z < spec.S)
        throw nothing_to_do("N_z = " + std::to_string(N_z) + " < S = " + std::to_string(spec.S));
    if (const SpecReport rep = validate_spec(spec, data); !rep.ok)
        throw assumption_b_violation(rep.violations.front());

    BorelSolution sol;
    sol.epsilon = epsilon;
    sol.N_tau = N_tau;
    for (const auto &slice : data.init) {
        const cplx c = slice.scale(epsilon);
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
            std::ostringstream msg;
            msg << "initial scale is not finite at |eps| = " << std::abs(epsilon);
            throw evaluation_error(msg.str());
        }
        sol.W.push_back(scale(slice.series, c).truncated(N_tau));
    }

    const TruncatedSeries inv = inverse_d_series(spec, N_tau);
    const auto ex = expansions(spec);
    // kernels[t][j]: term t applied to W_j, filled lazily.
    std::vector<std::vector<std::optional<TruncatedSeries>>> kernels(spec.terms.size());

    for (int beta = 0; beta <= N_z - spec.S; ++beta) {
        TruncatedSeries acc(Var::tau, N_tau);
        for (std::size_t ti = 0; ti < spec.terms.size(); ++ti) {
            const Term &t = spec.terms[ti];
            const cplx pre = eps_power_neg_r(spec, epsilon, t.s - t.kappa0);
            for (int a0 = 0; a0 <= beta; ++a0) {
                const cplx b = data.b_coeff(static_cast<int>(ti), a0, epsilon);
                if (b == cplx{0.0, 0.0})
                    continue;
                const auto j = static_cast<std::size_t>(beta - a0 + t.kappa1);
                auto &cache = kernels[ti];
                if (cache.size() <= j)
                    cache.resize(j + 1);
                if (!cache[j])
                    cache[j] = term_kernel(spec, t, ex[ti] ? &*ex[ti] : nullptr, sol.W[j]);
                acc = acc + scale(*cache[j], binomial(beta, a0) * b * pre);
            }
        }
        sol.W.push_back((inv * acc).truncated(N_tau));
    }
    return sol;
}

double borel_residual(const ProblemSpec &spec, const SectorData &data, const BorelSolution &sol) {
    const auto ex = expansions(spec);
    const TruncatedSeries dpoly = d_polynomial(spec, sol.N_tau + spec.k * spec.s1);
    double worst = 0.0;
    for (int beta = 0; beta + spec.S <= sol.N_z(); ++beta) {
        const TruncatedSeries lhs = scale(dpoly * sol.W[static_cast<std::size_t>(beta + spec.S)],
                                          1.0 / factorial(beta));
        TruncatedSeries rhs(Var::tau, sol.N_tau);
        std::vector<double> mag(static_cast<std::size_t>(sol.N_tau + 1), 0.0);
        for (std::size_t ti = 0; ti < spec.terms.size(); ++ti) {
            const Term &t = spec.terms[ti];
            for (int a0 = 0; a0 <= beta; ++a0) {
                const int a1 = beta - a0;
                const cplx c = data.b_coeff(static_cast<int>(ti), a0, sol.epsilon) / factorial(a0) *
                               eps_power_neg_r(spec, sol.epsilon, t.s - t.kappa0);
                if (c == cplx{0.0, 0.0})
                    continue;
                const TruncatedSeries w =
                    scale(sol.W[static_cast<std::size_t>(a1 + t.kappa1)], 1.0 / factorial(a1));
                const TruncatedSeries part =
                    scale(term_kernel(spec, t, ex[ti] ? &*ex[ti] : nullptr, w), c);
                for (int n = 0; n <= sol.N_tau && n <= part.order(); ++n)
                    mag[static_cast<std::size_t>(n)] += std::abs(part.coeff(n));
                rhs = rhs + part;
            }
        }
        const int top = std::min({lhs.order(), rhs.order(), sol.N_tau});
        for (int n = 0; n <= top; ++n) {
            const double scale_n = std::max(std::abs(lhs.coeff(n)), mag[static_cast<std::size_t>(n)]);
            if (scale_n == 0.0)
                continue;
            worst = std::max(worst, std::abs(lhs.coeff(n) - rhs.coeff(n)) / scale_n);
        }
    }
    return worst;
}

int majorant_eta(const ProblemSpec &spec, const Term &t) {
    return static_cast<int>(
               std::floor(spec.b_weight * (static_cast<double>(t.delta) / spec.k + t.kappa0 + 1))) -
           1;
}

double majorant_d(const ProblemSpec &spec, const Term &t) {
    double d = std::pow(static_cast<double>(spec.k), t.kappa0) /
               gamma_fn(static_cast<double>(t.delta) / spec.k);
    if (t.kappa0 >= 2) {
        const OperatorExpansion ex = expansion_constants(t.kappa0, spec.k);
        for (int p = 1; p <= t.kappa0 - 1; ++p)
            d += std::abs(ex[p]) * std::pow(static_cast<double>(spec.k), p) /
                 gamma_fn(static_cast<double>(t.delta + spec.k * (t.kappa0 - p)) / spec.k);
    }
    return d;
}

MajorantResult majorant_coeffs(const ProblemSpec &spec, double c1, double c2,
                               std::span<const double> w_init, int N_z, double C) {
    if (static_cast<int>(w_init.size()) != spec.S)
        throw invalid_grid("w_init must hold S values");
    if (!(c1 > 0) || !(c2 > 0) || !(C > 0))
        throw invalid_coefficient("majorant constants must be positive");
    MajorantResult out;
    out.u.assign(w_init.begin(), w_init.end());
    std::vector<int> eta;
    std::vector<double> dk;
    for (const auto &t : spec.terms) {
        eta.push_back(majorant_eta(spec, t));
        dk.push_back(majorant_d(spec, t));
    }
    std::vector<bool> warned(spec.terms.size(), false);
    for (int beta = 0; beta <= N_z - spec.S; ++beta) {
        double sum = 0.0;
        for (std::size_t ti = 0; ti < spec.terms.size(); ++ti) {
            if (beta < eta[ti]) {
                if (!warned[ti]) {
                    out.warnings.push_back("term " + std::to_string(ti) + ": beta < eta = " +
                                           std::to_string(eta[ti]) + ", contribution omitted");
                    warned[ti] = true;
                }
                continue;
            }
            double fall = 1.0;
            for (int j = 0; j < eta[ti]; ++j)
                fall *= beta - j;
            const Term &t = spec.terms[ti];
            for (int a0 = 0; a0 <= beta; ++a0) {
                const int a1 = beta - a0;
                sum += dk[ti] * fall * c1 * std::pow(c2, a0) *
                       out.u[static_cast<std::size_t>(a1 + t.kappa1)] / factorial(a1);
            }
        }
        out.u.push_back(C * factorial(beta) * sum);
    }
    return out;
}

double WeightParams::r_b(int beta) const {
    double s = 0.0;
    for (int n = 0; n <= beta; ++n)
        s += std::pow(n + 1.0, -b_weight);
    return s;
}

double WeightParams::xi_b(double *tail_bound) const {
    // Partial sum through n = N, then Euler–Maclaurin for the rest.
    constexpr double N = 1000.0;
    const double b = b_weight;
    double s = 0.0;
    for (int n = 1; n <= static_cast<int>(N); ++n)
        s += std::pow(static_cast<double>(n), -b);
    const double tail = std::pow(N, 1 - b) / (b - 1) - 0.5 * std::pow(N, -b) + b * std::pow(N, -b - 1) / 12;
    if (tail_bound)
        *tail_bound = b * (b + 1) * (b + 2) * std::pow(N, -b - 3) / 720;
    return s + tail;
}

NormValue weighted_norm(const TauFunction &h, int beta, cplx epsilon, std::span<const cplx> omega_grid,
                        const WeightParams &wp) {
    if (omega_grid.empty())
        throw invalid_grid("empty grid for weighted_norm");
    if (epsilon == cplx{0.0, 0.0})
        throw singular_parameter("epsilon = 0");
    const double er = std::pow(std::abs(epsilon), wp.r);
    const double damp = wp.sigma * wp.r_b(beta);
    NormValue out;
    for (cplx tau : omega_grid) {
        const double x = std::abs(tau) / er;
        if (x == 0.0)
            continue;
        const cplx v = h(tau);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            std::ostringstream msg;
            msg << "non-finite value at tau = (" << tau.real() << ", " << tau.imag() << ")";
            throw evaluation_error(msg.str());
        }
        const double w = (1 + std::pow(x, 2 * wp.k)) / x * std::exp(-damp * std::pow(x, wp.k));
        const double val = w * std::abs(v);
        if (val > out.value) {
            out.value = val;
            out.argmax = tau;
        }
    }
    return out;
}

std::vector<cplx> omega_grid(cplx epsilon, const WeightParams &wp, double rho0, int n_dir, int n_rad,
                             double x_min, double x_max) {
    const double er = std::pow(std::abs(epsilon), wp.r);
    std::vector<cplx> grid;
    for (int d = 0; d < n_dir; ++d) {
        const double th = 2 * pi * d / n_dir;
        for (int j = 0; j < n_rad; ++j) {
            const double x = x_min * std::pow(x_max / x_min, static_cast<double>(j) / (n_rad - 1));
            if (x * er <= rho0)
                grid.push_back(std::polar(x * er, th));
        }
        for (int j = 1; j <= n_rad / 2; ++j)
            grid.push_back(std::polar(rho0 * j / (n_rad / 2), th));
    }
    return grid;
}

std::vector<NormRow> solution_norms(const BorelSolution &sol, const WeightParams &wp, double rho0) {
    const auto grid = omega_grid(sol.epsilon, wp, rho0);
    std::vector<NormRow> rows;
    for (int beta = 0; beta <= sol.N_z(); ++beta) {
        const auto &w = sol.W[static_cast<std::size_t>(beta)];
        rows.push_back({beta, sol.epsilon,
                        weighted_norm([&](cplx t) { return w(t); }, beta, sol.epsilon, grid, wp).value});
    }
    return rows;
}

std::string norms_csv(std::span<const NormRow> rows) {
    std::ostringstream out;
    out.precision(17);
    out << "beta,epsilon_re,epsilon_im,norm\n";
    for (const auto &r : rows)
        out << r.beta << ',' << r.epsilon.real() << ',' << r.epsilon.imag() << ',' << r.norm << '\n';
    return out.str();
}

DominationResult find_dominating_constant(const ProblemSpec &spec, double c1, double c2,
                                          std::span<const double> norms, double C_max) {
    DominationResult out;
    out.w.assign(norms.begin(), norms.end());
    const int N_z = static_cast<int>(norms.size()) - 1;
    const auto init = norms.first(static_cast<std::size_t>(spec.S));
    auto dominates = [&](double C, std::vector<double> *u) {
        auto m = majorant_coeffs(spec, c1, c2, init, N_z, C);
        bool ok = true;
        for (std::size_t b = 0; b < norms.size(); ++b)
            ok = ok && norms[b] <= m.u[b] * (1 + 1e-12);
        if (u)
            *u = std::move(m.u);
        return ok;
    };
    double hi = 1.0;
    while (!dominates(hi, nullptr)) {
        hi *= 2;
        if (hi > C_max)
            return out;
    }
    double lo = 0.5 * hi;
    if (hi == 1.0)
        lo = 0.0;
    for (int it = 0; it < 20; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid > 0 && dominates(mid, nullptr))
            hi = mid;
        else
            lo = mid;
    }
    out.found = true;
    out.C = hi;
    dominates(hi, &out.u);
    return out;
}

GeometricEnvelope fit_factorial_envelope(std::span<const double> u) {
    GeometricEnvelope out;
    const int n = static_cast<int>(u.size()) - 1;
    if (n < 2)
        throw invalid_grid("envelope fit needs at least three coefficients");
    std::vector<double> v(u.size());
    for (int b = 0; b <= n; ++b)
        v[static_cast<std::size_t>(b)] = u[static_cast<std::size_t>(b)] / factorial(b);
    double ratio = 0.0;
    for (int b = n / 2 + 1; b <= n; ++b)
        if (v[static_cast<std::size_t>(b - 1)] > 0)
            ratio = std::max(ratio, v[static_cast<std::size_t>(b)] / v[static_cast<std::size_t>(b - 1)]);
    out.Z0 = ratio > 0 ? 1.05 * ratio : 1.0;
    for (int b = 0; b <= n; ++b)
        out.Z1 = std::max(out.Z1, v[static_cast<std::size_t>(b)] / std::pow(out.Z0, b));
    out.verified = true;
    for (int b = 0; b <= n; ++b)
        out.verified = out.verified &&
                       v[static_cast<std::size_t>(b)] <= out.Z1 * std::pow(out.Z0, b) * (1 + 1e-12);
    return out;
}

CocycleNormReport cocycle_norm_check(std::span<const std::pair<BorelSolution, BorelSolution>> pairs,
                                     const SequenceSpec &seq, const WeightParams &wp, double rho0) {
    if (pairs.size() < 2)
        throw invalid_grid("cocycle_norm_check needs at least two epsilon values");
    CocycleNormReport out;
    std::vector<std::vector<double>> norms;
    bool any = false;
    for (const auto &[si, sj] : pairs) {
        if (si.epsilon != sj.epsilon || si.W.size() != sj.W.size())
            throw variable_mismatch("paired solutions differ in epsilon or N_z");
        const auto grid = omega_grid(si.epsilon, wp, rho0);
        std::vector<double> row;
        for (std::size_t b = 0; b < si.W.size(); ++b) {
            const TruncatedSeries d = sj.W[b] - si.W[b];
            const double v =
                weighted_norm([&](cplx t) { return d(t); }, static_cast<int>(b), si.epsilon, grid, wp).value;
            any = any || v > 0;
            row.push_back(v);
        }
        norms.push_back(std::move(row));
        out.eps_modulus.push_back(std::abs(si.epsilon));
    }
    if (!any) {
        out.degenerate = true;
        return out;
    }

    // c0: steepest log-slope of norm_β/β! in β over the grid.
    for (const auto &row : norms) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
        for (std::size_t b = 0; b < row.size(); ++b) {
            if (!(row[b] > 0))
                continue;
            const double x = static_cast<double>(b);
            const double y = std::log(row[b]) - log_gamma(x + 1);
            sx += x, sy += y, sxx += x * x, sxy += x * y, n += 1;
        }
        if (n >= 2 && n * sxx - sx * sx > 0)
            out.c0 = std::max(out.c0, std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx)));
    }
    if (!(out.c0 > 0))
        out.c0 = 1.0;

    std::vector<double> log_profile;
    for (const auto &row : norms) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < row.size(); ++b)
            if (row[b] > 0)
                best = std::max(best, std::log(row[b]) - log_gamma(b + 1.0) -
                                          static_cast<double>(b) * std::log(out.c0));
        log_profile.push_back(best);
        out.profile.push_back(std::exp(best));
    }

    // Least-squares log fit over K, then c1 as the envelope constant.
    auto rms = [&](double logK) {
        const double K = std::exp(logK);
        double mean = 0, cnt = 0;
        std::vector<double> d;
        for (std::size_t j = 0; j < log_profile.size(); ++j) {
            if (!std::isfinite(log_profile[j]))
                continue;
            d.push_back(log_profile[j] - log_h_m(seq, K * out.eps_modulus[j]));
            mean += d.back();
            cnt += 1;
        }
        if (cnt < 2)
            return std::numeric_limits<double>::infinity();
        mean /= cnt;
        double s = 0;
        for (double x : d)
            s += (x - mean) * (x - mean);
        return std::sqrt(s / cnt);
    };
    double best_lk = 0.0;
    double best_r = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 120; ++i) {
        const double lk = std::log(1e-3) + i * std::log(1e6) / 120;
        const double r = rms(lk);
        if (r < best_r) {
            best_r = r;
            best_lk = lk;
        }
    }
    double lo = best_lk - std::log(1e6) / 120;
    double hi = best_lk + std::log(1e6) / 120;
    const double g = 0.5 * (std::sqrt(5.0) - 1);
    for (int it = 0; it < 40; ++it) {
        const double m1 = hi - g * (hi - lo);
        const double m2 = lo + g * (hi - lo);
        if (rms(m1) < rms(m2))
            hi = m2;
        else
            lo = m1;
    }
    best_lk = 0.5 * (lo + hi);
    out.K2 = std::exp(best_lk);
    out.residual = rms(best_lk) / std::log(10.0);
    double lc1 = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < log_profile.size(); ++j)
        if (std::isfinite(log_profile[j]))
            lc1 = std::max(lc1, log_profile[j] - log_h_m(seq, out.K2 * out.eps_modulus[j]));
    out.c1 = std::exp(lc1);
    return out;
}

std::string solution_to_text(const BorelSolution &sol) {
    std::ostringstream out;
    out.precision(17);
    out << "# epsilon " << sol.epsilon.real() << ' ' << sol.epsilon.imag() << ", N_tau " << sol.N_tau
        << ", " << sol.branch << '\n';
    for (std::size_t b = 0; b < sol.W.size(); ++b)
        out << "W[" << b << "] = " << to_json(sol.W[b]) << '\n';
    return out.str();
}

} // namespace msl
