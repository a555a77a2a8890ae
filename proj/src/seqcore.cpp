#include "msl/seqcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "msl/errors.hpp"
#include "msl/special.hpp"

namespace msl {

namespace {

constexpr double witness_cap = 1e12;

double lse(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity())
        return b;
    if (b == -std::numeric_limits<double>::infinity())
        return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

} // namespace

SequenceSpec::SequenceSpec(Kind kind, double alpha, double beta,
                           std::vector<double> log_values)
    : kind_(kind), alpha_(alpha), beta_(beta), log_m_(std::move(log_values)) {}

SequenceSpec::SequenceSpec(const SequenceSpec &other)
    : kind_(other.kind_), alpha_(other.alpha_), beta_(other.beta_) {
    std::lock_guard lock(*other.guard_);
    log_m_ = other.log_m_;
}

SequenceSpec &SequenceSpec::operator=(const SequenceSpec &other) {
    if (this != &other) {
        SequenceSpec copy(other);
        *this = std::move(copy);
    }
    return *this;
}

SequenceSpec SequenceSpec::gevrey(double alpha) {
    if (!(alpha > 0) || !std::isfinite(alpha))
        throw invalid_sequence("gevrey index must be positive");
    return SequenceSpec(Kind::gevrey, alpha, 0.0, {});
}

SequenceSpec SequenceSpec::logmod(double alpha, double beta) {
    if (!(alpha > 0) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw invalid_sequence("logmod needs alpha > 0 and finite beta");
    return SequenceSpec(Kind::logmod, alpha, beta, {0.0});
}

SequenceSpec SequenceSpec::table(std::vector<double> log_values) {
    if (log_values.size() < 3)
        throw invalid_sequence("table needs at least three values");
    if (log_values.front() != 0.0)
        throw invalid_sequence("table must start with log M_0 = 0");
    for (std::size_t p = 0; p < log_values.size(); ++p)
        if (!std::isfinite(log_values[p]))
            throw invalid_sequence("non-finite log M_" + std::to_string(p));
    return SequenceSpec(Kind::table, 0.0, 0.0, std::move(log_values));
}

SequenceSpec SequenceSpec::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string kind;
    in >> kind;
    if (kind == "gevrey") {
        double a;
        if (!(in >> a))
            throw invalid_sequence("expected `gevrey <alpha>`");
        return gevrey(a);
    }
    if (kind == "logmod") {
        double a, b;
        if (!(in >> a >> b))
            throw invalid_sequence("expected `logmod <alpha> <beta>`");
        return logmod(a, b);
    }
    if (kind == "table") {
        std::string path;
        if (!(in >> path))
            throw invalid_sequence("expected `table <path>`");
        std::ifstream file(path);
        if (!file)
            throw invalid_sequence("cannot open " + path);
        std::vector<double> values;
        std::string line;
        while (std::getline(file, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            try {
                values.push_back(std::stod(line));
            } catch (const std::exception &) {
                throw invalid_sequence("bad table line `" + line + "` in " + path);
            }
        }
        return table(std::move(values));
    }
    throw invalid_sequence("unknown sequence kind `" + kind + "`");
}

std::string SequenceSpec::describe() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind_) {
    case Kind::gevrey: out << "gevrey " << alpha_; break;
    case Kind::logmod: out << "logmod " << alpha_ << ' ' << beta_; break;
    case Kind::table: out << "table[" << log_m_.size() << "]"; break;
    }
    return out.str();
}

std::size_t SequenceSpec::p_limit() const {
    if (kind_ == Kind::table)
        return log_m_.size() - 1;
    return std::numeric_limits<std::size_t>::max();
}

void SequenceSpec::extend(std::size_t p) const {
    // caller holds the lock
    const std::size_t from = log_m_.size();
    if (p < from)
        return;
    log_m_.reserve(std::max(p + 1, 2 * from));
    // Recover the running β-sum from the last cached value.
    double beta_sum = log_m_.back() - alpha_ * log_gamma(static_cast<double>(from));
    for (std::size_t q = from; q <= p; ++q) {
        beta_sum += beta_ * std::log(std::log(std::numbers::e + static_cast<double>(q)));
        log_m_.push_back(alpha_ * log_gamma(static_cast<double>(q) + 1.0) + beta_sum);
    }
}

double SequenceSpec::log_m(std::size_t p) const {
    switch (kind_) {
    case Kind::gevrey:
        return alpha_ * log_gamma(static_cast<double>(p) + 1.0);
    case Kind::table:
        if (p >= log_m_.size())
            throw invalid_sequence("table ends at p = " +
                                   std::to_string(log_m_.size() - 1));
        return log_m_[p];
    case Kind::logmod: {
        std::lock_guard lock(*guard_);
        extend(p);
        return log_m_[p];
    }
    }
    return 0.0;
}

RegularityReport check_strong_regularity(const SequenceSpec &seq, std::size_t p_max) {
    if (p_max < 4)
        throw invalid_grid("check_strong_regularity needs p_max >= 4");
    std::vector<double> lm(p_max + 1);
    for (std::size_t p = 0; p <= p_max; ++p) {
        lm[p] = seq.log_m(p);
        if (!std::isfinite(lm[p]))
            throw invalid_sequence("non-finite log M_" + std::to_string(p));
    }
    if (lm[0] != 0.0)
        throw invalid_sequence("M_0 must equal 1");

    RegularityReport rep;
    rep.p_max = p_max;
    rep.scope = "verified on 0 <= p <= " + std::to_string(p_max) + " only";

    rep.alpha0_ok = true;
    for (std::size_t p = 1; p < p_max; ++p) {
        const double lhs = 2 * lm[p];
        const double rhs = lm[p - 1] + lm[p + 1];
        if (lhs > rhs + 1e-12 * (1.0 + std::abs(lhs))) {
            rep.alpha0_ok = false;
            std::ostringstream d;
            d.precision(17);
            d << "2 log M_p = " << lhs << " > " << rhs;
            rep.failures.push_back({"alpha0", p, d.str()});
        }
    }

    double log_a = 0.0;
    for (std::size_t n = 1; n <= p_max; ++n)
        for (std::size_t p = 0; p <= n; ++p)
            log_a = std::max(log_a, (lm[n] - lm[p] - lm[n - p]) / static_cast<double>(n));
    rep.witness_a = std::exp(log_a);
    rep.mu_ok = rep.witness_a <= witness_cap;
    if (!rep.mu_ok)
        rep.failures.push_back({"mu", p_max, "witness A exceeds cap"});

    // Smallest B making the truncated (γ₁) sums hold on [0, n).
    auto witness_b = [&](std::size_t n) {
        double tail = -std::numeric_limits<double>::infinity();
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t q = n; q-- > 0;) {
            tail = lse(tail, lm[q] - lm[q + 1] - std::log(static_cast<double>(q) + 1.0));
            worst = std::max(worst, tail + lm[q + 1] - lm[q]);
        }
        return std::exp(worst);
    };
    const double b4 = witness_b(p_max / 4);
    const double b2 = witness_b(p_max / 2);
    const double b1 = witness_b(p_max);
    rep.witness_b_range = b1;
    const double d1 = b2 - b4;
    const double d2 = b1 - b2;
    double extrapolated = b1;
    if (d2 > 1e-14 * b1) {
        const double ratio = d1 > 0 ? d2 / d1 : std::numeric_limits<double>::infinity();
        extrapolated = ratio < 0.95 ? b1 + d2 * ratio / (1 - ratio)
                                    : std::numeric_limits<double>::infinity();
    }
    rep.witness_b = extrapolated;
    rep.gamma1_ok = extrapolated <= witness_cap;
    if (!rep.gamma1_ok) {
        std::ostringstream d;
        d.precision(6);
        d << "witness grows without contraction over range doublings (B on range = "
          << b1 << ", increments " << d1 << ", " << d2 << ")";
        rep.failures.push_back({"gamma1", p_max, d.str()});
    }
    return rep;
}

HmValue h_m_scan(const SequenceSpec &seq, double t, std::size_t p_scan_max) {
    if (!(t >= 0) || !std::isfinite(t))
        throw invalid_grid("h_m needs finite t >= 0");
    if (t == 0.0)
        return {0.0, 0, -std::numeric_limits<double>::infinity()};
    const double lt = std::log(t);
    const std::size_t cap = std::min(p_scan_max, seq.p_limit());
    double best = 0.0;
    std::size_t arg = 0;
    double prev = 0.0;
    for (std::size_t p = 1; p <= cap; ++p) {
        const double term = seq.log_m(p) + static_cast<double>(p) * lt;
        const double tol = 1e-13 * (1.0 + std::abs(term));
        if (term > prev + tol)
            return {std::exp(best), arg, best};
        if (term < best - tol) {
            best = term;
            arg = p;
        }
        prev = term;
    }
    throw unbounded_scan("no turning point for t = " + std::to_string(t) +
                         " within p <= " + std::to_string(cap));
}

double h_m(const SequenceSpec &seq, double t, std::size_t p_scan_max) {
    return h_m_scan(seq, t, p_scan_max).value;
}

double log_h_m(const SequenceSpec &seq, double t, std::size_t p_scan_max) {
    return h_m_scan(seq, t, p_scan_max).log_value;
}

OmegaEstimate omega_estimate(const SequenceSpec &seq, std::size_t n_max) {
    if (n_max < 100)
        throw invalid_grid("omega_estimate needs n_max >= 100");
    std::vector<std::size_t> ns;
    for (std::size_t n = n_max; n >= 3; n /= 2)
        ns.push_back(n);
    std::reverse(ns.begin(), ns.end());

    std::vector<double> q(ns.size());
    for (std::size_t j = 0; j < ns.size(); ++j) {
        const double n = static_cast<double>(ns[j]);
        q[j] = (seq.log_m(ns[j] + 1) - seq.log_m(ns[j])) / std::log(n);
        if (!std::isfinite(q[j]))
            throw estimation_failed("non-finite quotient at n = " + std::to_string(ns[j]));
    }
    int direction = 0;
    for (std::size_t j = 1; j < q.size(); ++j) {
        const double d = q[j] - q[j - 1];
        if (std::abs(d) <= 1e-14 * std::abs(q[j]))
            continue;
        const int s = d > 0 ? 1 : -1;
        if (direction != 0 && s != direction)
            throw estimation_failed("quotients are not monotone near n = " +
                                    std::to_string(ns[j]));
        direction = s;
    }

    // Eliminate c·loglog n/log n + d/log n across each consecutive triple.
    std::vector<double> est;
    for (std::size_t j = 2; j < ns.size(); ++j) {
        std::array<std::array<double, 4>, 3> m{};
        for (int r = 0; r < 3; ++r) {
            const double L = std::log(static_cast<double>(ns[j - 2 + r]));
            m[r] = {1.0, std::log(L) / L, 1.0 / L, q[j - 2 + r]};
        }
        for (int c = 0; c < 3; ++c) {
            int piv = c;
            for (int r = c + 1; r < 3; ++r)
                if (std::abs(m[r][c]) > std::abs(m[piv][c]))
                    piv = r;
            std::swap(m[c], m[piv]);
            for (int r = 0; r < 3; ++r) {
                if (r == c)
                    continue;
                const double f = m[r][c] / m[c][c];
                for (int cc = c; cc < 4; ++cc)
                    m[r][cc] -= f * m[c][cc];
            }
        }
        est.push_back(m[0][3] / m[0][0]);
    }
    OmegaEstimate out;
    out.value = est.back();
    const std::size_t k = std::min<std::size_t>(3, est.size());
    const auto [lo, hi] = std::minmax_element(est.end() - k, est.end());
    out.error = *hi - *lo;
    out.last_quotient = q.back();
    if (!std::isfinite(out.value))
        throw estimation_failed("extrapolation produced a non-finite value");
    return out;
}

MomentResult moment_integral(const SequenceSpec &seq, int p, double k1, double rel_tol) {
    if (p < 1)
        throw invalid_grid("moment needs p >= 1");
    if (!(k1 > 0))
        throw invalid_grid("moment needs K1 > 0");
    constexpr int per_decade = 64;
    constexpr double log_lo = -6.0;
    constexpr int points = 12 * per_decade;
    const double pd = static_cast<double>(p);

    auto sample = [&](double t) {
        try {
            return h_m_scan(seq, k1 / t);
        } catch (const unbounded_scan &e) {
            throw tail_not_converged(std::string("h_M unresolved at t = ") +
                                     std::to_string(t) + " (" + e.what() + ")");
        } catch (const invalid_sequence &e) {
            throw tail_not_converged(std::string("sequence exhausted at t = ") +
                                     std::to_string(t) + " (" + e.what() + ")");
        }
    };

    const double t0 = std::pow(10.0, log_lo);
    const HmValue h0 = sample(t0);
    // h_M(K1/t) only grows as t decreases, so below the grid it lies in
    // [h0, 1]; the head is exact when h0 = 1.
    const double head = std::pow(t0, pd) / pd;
    double total = head;
    const double head_slack = (1.0 - h0.value) * head;
    // With argmin q fixed the integrand is M_q K1^q t^{p-1-q}; integrate those
    // pieces exactly, switching at t = K1 M_{q+1}/M_q.
    const double log_k1 = std::log(k1);
    auto piece = [&](std::size_t q, double a, double b) {
        if (!(b > a))
            return 0.0;
        const double c = seq.log_m(q) + static_cast<double>(q) * log_k1;
        const double e = pd - static_cast<double>(q);
        if (e == 0.0)
            return std::exp(c) * (std::log(b) - std::log(a));
        return (std::exp(c + e * std::log(b)) - std::exp(c + e * std::log(a))) / e;
    };
    double tail = std::numeric_limits<double>::infinity();
    double t_end = t0;
    double t_prev = t0;
    std::size_t q_prev = h0.argmin;
    for (int i = 1; i <= points; ++i) {
        const double t = std::pow(10.0, log_lo + static_cast<double>(i) / per_decade);
        const HmValue h = sample(t);
        double a = t_prev;
        for (std::size_t q = q_prev; q < h.argmin; ++q) {
            const double sw = std::clamp(k1 * std::exp(seq.log_m(q + 1) - seq.log_m(q)), a, t);
            total += piece(q, a, sw);
            a = sw;
        }
        total += piece(h.argmin, a, t);
        t_prev = t;
        q_prev = h.argmin;
        const double g = std::pow(t, pd) * h.value;
        t_end = t;
        const double q = static_cast<double>(h.argmin);
        if (q > pd) {
            tail = g / (q - pd) + head_slack;
            if (tail <= rel_tol * total)
                return {total, tail, t_end};
        }
    }
    throw tail_not_converged("tail bound " + std::to_string(tail) +
                             " not below tolerance at t = " + std::to_string(t_end));
}

double moment(const SequenceSpec &seq, int p, double k1) {
    return moment_integral(seq, p, k1).value;
}

EnvelopeResult hm_gevrey_envelope(const SequenceSpec &seq, double rk, double k2,
                                  std::span<const double> eps_grid) {
    if (eps_grid.empty())
        throw invalid_grid("empty epsilon grid");
    for (double e : eps_grid)
        if (!(e > 0) || !std::isfinite(e))
            throw invalid_grid("epsilon grid must be positive and finite");
    EnvelopeResult out;
    out.k_prime = std::numeric_limits<double>::infinity();
    for (double e : eps_grid) {
        const double kp = -std::pow(e, rk) * log_h_m(seq, k2 * e);
        out.pointwise.push_back(kp);
        out.k_prime = std::min(out.k_prime, kp);
    }
    out.trend = 0.0;
    if (eps_grid.size() >= 2 && out.k_prime > 0) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(eps_grid.size());
        for (std::size_t j = 0; j < eps_grid.size(); ++j) {
            const double x = std::log(eps_grid[j]);
            const double y = std::log(out.pointwise[j]);
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        const double den = n * sxx - sx * sx;
        if (den > 0)
            out.trend = (n * sxy - sx * sy) / den;
    }
    out.holds = out.k_prime > 0 && out.trend <= 0.05;
    return out;
}

} // namespace msl
