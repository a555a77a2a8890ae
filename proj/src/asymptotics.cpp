#include "msl/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "msl/errors.hpp"
#include "msl/quadrature.hpp"

namespace msl {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
const double ln10 = std::log(10.0);

double golden_min(const std::function<double(double)> &f, double lo, double hi, int iters = 60) {
    const double g = 0.5 * (std::sqrt(5.0) - 1);
    double m1 = hi - g * (hi - lo);
    double m2 = lo + g * (hi - lo);
    double f1 = f(m1);
    double f2 = f(m2);
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - g * (hi - lo);
            f1 = f(m1);
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + g * (hi - lo);
            f2 = f(m2);
        }
    }
    return 0.5 * (lo + hi);
}

struct LineFit {
    double intercept;
    double slope;
    double sse;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        sx += x[j];
        sy += y[j];
        sxx += x[j] * x[j];
        sxy += x[j] * y[j];
    }
    const double den = n * sxx - sx * sx;
    LineFit f{sy / n, 0.0, 0.0};
    if (den != 0) {
        f.slope = (n * sxy - sx * sy) / den;
        f.intercept = (sy - f.slope * sx) / n;
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double r = y[j] - f.intercept - f.slope * x[j];
        f.sse += r * r;
    }
    return f;
}

double factorial(int n) {
    double out = 1.0;
    for (int i = 2; i <= n; ++i)
        out *= i;
    return out;
}

double binomial(int n, int j) {
    double out = 1.0;
    for (int i = 1; i <= j; ++i)
        out = out * (n - j + i) / i;
    return out;
}

} // namespace

std::string_view model_name(FlatnessModel m) {
    switch (m) {
    case FlatnessModel::gevrey: return "gevrey";
    case FlatnessModel::hm: return "hm";
    case FlatnessModel::none: return "none";
    }
    return "none";
}

FlatnessReport fit_flatness(const CocycleSample &cs, const SequenceSpec *candidate_seq) {
    FlatnessReport out;
    out.sample_count = cs.samples.size();
    if (cs.samples.size() < 8)
        throw invalid_grid("fit_flatness needs at least 8 samples");
    std::vector<double> e;
    std::vector<double> l;
    out.eps_min = inf;
    for (const auto &[eps, v] : cs.samples) {
        const double em = std::abs(eps);
        if (em == 0)
            throw invalid_grid("epsilon = 0 in cocycle samples");
        if (!(std::abs(v) < 1))
            throw invalid_grid("cocycle values must have modulus < 1");
        out.eps_min = std::min(out.eps_min, em);
        out.eps_max = std::max(out.eps_max, em);
        if (std::abs(v) == 0)
            continue;
        e.push_back(em);
        l.push_back(std::log(std::abs(v)));
    }
    if (out.eps_max < 100 * out.eps_min)
        throw invalid_grid("samples must span at least two decades of |eps|");
    if (e.size() < cs.samples.size())
        out.notes.push_back(std::to_string(cs.samples.size() - e.size()) +
                            " exactly-zero samples dropped");
    if (e.empty()) {
        out.zero_envelope = true;
        out.residual = 0.0;
        return out;
    }
    if (e.size() < 3) {
        out.notes.push_back("fewer than three nonzero samples, no fit");
        return out;
    }

    // Gevrey: y = log(−log|Δ|) against x = log(1/|ε|) for a first α, then
    // log|Δ| = c − M·|ε|^{−α} by least squares with α refined.
    {
        std::vector<double> x, y;
        for (std::size_t j = 0; j < e.size(); ++j) {
            x.push_back(-std::log(e[j]));
            y.push_back(std::log(-l[j]));
        }
        const double a0 = fit_line(x, y).slope;
        if (a0 > 0) {
            auto fit_at = [&](double alpha) {
                std::vector<double> u(e.size());
                for (std::size_t j = 0; j < e.size(); ++j)
                    u[j] = -std::pow(e[j], -alpha);
                return fit_line(u, l);
            };
            const double alpha = golden_min([&](double a) { return fit_at(a).sse; }, 0.5 * a0, 2 * a0);
            const LineFit f = fit_at(alpha);
            if (f.slope > 0) {
                double worst = 0, top = -inf;
                for (std::size_t j = 0; j < e.size(); ++j) {
                    const double dev = l[j] - (f.intercept - f.slope * std::pow(e[j], -alpha));
                    worst = std::max(worst, std::abs(dev));
                    top = std::max(top, dev);
                }
                out.alpha = alpha;
                out.M1 = f.slope;
                out.K1 = std::exp(f.intercept + top);
                out.gevrey_residual = worst / ln10;
            } else {
                out.notes.push_back("gevrey fit gave a non-positive M1");
            }
        } else {
            out.notes.push_back("log(-log|delta|) does not grow with 1/|eps|; no gevrey fit");
        }
    }

    // h_M: for each K the ratios |Δ_j|/h_M(K|ε_j|); the spread of their logs
    // measures the fit.
    if (candidate_seq) {
        out.seq = candidate_seq->describe();
        auto ratios = [&](double logK, double &lo, double &hi) {
            lo = inf;
            hi = -inf;
            try {
                for (std::size_t j = 0; j < e.size(); ++j) {
                    const double r = l[j] - log_h_m(*candidate_seq, std::exp(logK) * e[j]);
                    lo = std::min(lo, r);
                    hi = std::max(hi, r);
                }
            } catch (const convergence_error &) {
                lo = -inf;
                hi = inf;
            }
        };
        auto spread = [&](double logK) {
            double lo, hi;
            ratios(logK, lo, hi);
            return (hi - lo) / ln10;
        };
        constexpr int steps = 160;
        const double lk_lo = std::log(1e-2);
        const double lk_step = std::log(1e4) / steps;
        std::vector<std::pair<double, double>> grid;
        double best_lk = lk_lo, best = inf;
        for (int i = 0; i <= steps; ++i) {
            const double lk = lk_lo + i * lk_step;
            const double s = spread(lk);
            grid.emplace_back(lk, s);
            if (s < best) {
                best = s;
                best_lk = lk;
            }
        }
        if (std::isfinite(best)) {
            best_lk = golden_min(spread, best_lk - lk_step, best_lk + lk_step, 40);
            best = spread(best_lk);
            grid.emplace_back(best_lk, best);
            // Among near-optimal K, the regularized C·(1 + |log K|) decides.
            double pick = best_lk, pick_obj = inf;
            for (const auto &[lk, s] : grid) {
                if (!(s <= best + 0.05))
                    continue;
                double lo, hi;
                ratios(lk, lo, hi);
                const double obj = std::exp(hi) * (1 + std::abs(lk));
                if (obj < pick_obj) {
                    pick_obj = obj;
                    pick = lk;
                }
            }
            double lo, hi;
            ratios(pick, lo, hi);
            out.K = std::exp(pick);
            out.C = std::exp(hi);
            out.hm_residual = 0.5 * (hi - lo) / ln10;
        } else {
            out.notes.push_back("h_M scan failed for every K");
        }
    }

    const bool hm_better = out.hm_residual < out.gevrey_residual;
    out.residual = std::min(out.hm_residual, out.gevrey_residual);
    if (out.residual > 0.5)
        out.model = FlatnessModel::none;
    else
        out.model = hm_better ? FlatnessModel::hm : FlatnessModel::gevrey;
    return out;
}

std::string to_json(const FlatnessReport &r) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["model"] = model_name(r.model);
    j["gevrey"] = {{"alpha", num(r.alpha)}, {"M1", num(r.M1)}, {"K1", num(r.K1)}, {"residual", num(r.gevrey_residual)}};
    j["hm"] = {{"seq", r.seq}, {"C", num(r.C)}, {"K", num(r.K)}, {"residual", num(r.hm_residual)}};
    j["residual"] = num(r.residual);
    j["sample_count"] = r.sample_count;
    j["eps_range"] = {r.eps_min, r.eps_max};
    j["zero_envelope"] = r.zero_envelope;
    j["notes"] = r.notes;
    return j.dump(2);
}

SplitCocycle split_cocycle(std::span<const CocycleSample> deltas, std::span<const Adjacency> verdicts) {
    if (deltas.size() != verdicts.size())
        throw invalid_grid("one verdict per overlap is required");
    SplitCocycle out;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        CocycleSample zero = deltas[i];
        for (auto &s : zero.samples)
            s.second = 0.0;
        if (verdicts[i].singular_between) {
            out.level1.push_back(deltas[i]);
            out.level2.push_back(std::move(zero));
        } else {
            out.level1.push_back(std::move(zero));
            out.level2.push_back(deltas[i]);
        }
    }
    return out;
}

CauchyHeine::CauchyHeine(GoodCovering covering, std::vector<ComplexFunction> cocycle, double r_tilde, double tol,
                         double inner_cutoff)
    : covering_(std::move(covering)), cocycle_(std::move(cocycle)), r_tilde_(r_tilde), tol_(tol),
      inner_cutoff_(inner_cutoff) {
    if (cocycle_.size() != covering_.size())
        throw invalid_grid("one cocycle function per overlap is required");
    if (!(r_tilde_ > 0) || r_tilde_ > covering_[0].radius)
        throw invalid_grid("r_tilde must lie in (0, sector radius]");
    if (!(inner_cutoff_ >= 0) || inner_cutoff_ >= r_tilde_)
        throw invalid_grid("inner cutoff must lie in [0, r_tilde)");
    for (std::size_t h = 0; h < covering_.size(); ++h)
        rays_.push_back(covering_.overlap_mid(h));
}

bool CauchyHeine::is_zero() const {
    return std::none_of(cocycle_.begin(), cocycle_.end(), [](const ComplexFunction &f) { return bool(f); });
}

cplx CauchyHeine::cocycle(std::size_t h, cplx xi) const {
    return cocycle_[h] ? cocycle_[h](xi) : cplx{0.0, 0.0};
}

cplx CauchyHeine::ray_integral(std::size_t h, double theta, cplx eps) const {
    const cplx dir = std::polar(1.0, theta);
    const RealToComplex f = [&](double t) {
        const cplx xi = t * dir;
        return cocycle_[h](xi) * dir / (xi - eps);
    };
    const double a = inner_cutoff_;
    const double m = std::abs(eps);
    cplx sum{0.0, 0.0};
    if (m > a && m < r_tilde_) {
        sum += integrate_adaptive(f, a, m, 0.1 * tol_, tol_).value;
        sum += integrate_adaptive(f, m, r_tilde_, 0.1 * tol_, tol_).value;
    } else {
        sum += integrate_adaptive(f, a, r_tilde_, 0.1 * tol_, tol_).value;
    }
    return sum;
}

cplx CauchyHeine::arc_integral(std::size_t h, double from, double to, cplx eps) const {
    const RealToComplex f = [&](double phi) {
        const cplx xi = std::polar(r_tilde_, phi);
        return cocycle_[h](xi) * cplx{0.0, 1.0} * xi / (xi - eps);
    };
    if (from > to)
        return -integrate_adaptive(f, to, from, 0.1 * tol_, tol_).value;
    return integrate_adaptive(f, from, to, 0.1 * tol_, tol_).value;
}

cplx CauchyHeine::psi(std::size_t ell, cplx eps) const {
    const std::size_t nu = covering_.size();
    if (ell >= nu)
        throw invalid_grid("sector index out of range");
    if (is_zero())
        return {0.0, 0.0};
    if (!(std::abs(eps) > 0) || std::abs(eps) >= r_tilde_)
        throw geometry_error("psi needs 0 < |eps| < r_tilde");

    // E_ℓ sits between the rays of overlaps ℓ−1 and ℓ; rotate either inside
    // its overlap when ε lies past it or too close to it.
    const std::size_t left = (ell + nu - 1) % nu;
    const std::size_t right = ell;
    const double wl = covering_.overlap_width(left);
    const double wr = covering_.overlap_width(right);
    const double clearance = std::min(wl, wr) / 16;
    const double arg = std::arg(eps);
    double tl = rays_[left], tr = rays_[right];
    bool found = false;
    for (double dl : {0.0, -0.25 * wl, -0.45 * wl}) {
        for (double dr : {0.0, 0.25 * wr, 0.45 * wr}) {
            const double cl = rays_[left] + dl;
            const double cr = rays_[right] + dr;
            const double width = wrap_2pi(cr - cl);
            const double u = wrap_2pi(arg - cl);
            if (u > clearance && u < width - clearance) {
                tl = cl;
                tr = cr;
                found = true;
                break;
            }
        }
        if (found)
            break;
    }
    if (!found) {
        std::ostringstream msg;
        msg << "eps with arg " << arg << " cannot be separated from the rays of sector " << ell;
        throw path_collision(msg.str());
    }

    cplx sum{0.0, 0.0};
    for (std::size_t h = 0; h < nu; ++h) {
        if (!cocycle_[h])
            continue;
        double theta = rays_[h];
        if (h == left)
            theta = tl;
        if (h == right)
            theta = tr;
        sum += ray_integral(h, theta, eps);
        if (theta != rays_[h])
            sum += arc_integral(h, theta, rays_[h], eps);
    }
    return sum / cplx{0.0, 2 * pi};
}

cplx CauchyHeine::coefficient(int p) const {
    cplx sum{0.0, 0.0};
    for (std::size_t h = 0; h < covering_.size(); ++h) {
        if (!cocycle_[h])
            continue;
        const cplx dir = std::polar(1.0, rays_[h]);
        const RealToComplex f = [&](double t) {
            const cplx xi = t * dir;
            return cocycle_[h](xi) * dir / std::pow(xi, p + 1);
        };
        try {
            sum += integrate_adaptive(f, inner_cutoff_, r_tilde_, 0.1 * tol_ * std::pow(r_tilde_, -p), tol_).value;
        } catch (const consistency_error &) {
            throw p_too_large("coefficient integral diverges at p = " + std::to_string(p) +
                              "; the cocycle is not flat enough for this order");
        }
    }
    const cplx out = sum / cplx{0.0, 2 * pi};
    if (!std::isfinite(out.real()) || !std::isfinite(out.imag()))
        throw p_too_large("coefficient integral overflows at p = " + std::to_string(p));
    return out;
}

std::vector<cplx> CauchyHeine::coefficients(int p_max) const {
    std::vector<cplx> out;
    for (int p = 0; p <= p_max; ++p)
        out.push_back(is_zero() ? cplx{0.0, 0.0} : coefficient(p));
    return out;
}

RemainderEnvelope remainder_envelope(const CauchyHeine &ch, std::size_t ell, std::span<const cplx> coeffs,
                                     const SequenceSpec &seq, std::span<const cplx> eps_grid, int N_max) {
    if (static_cast<int>(coeffs.size()) < N_max)
        throw invalid_grid("need a_p for p < N_max");
    if (eps_grid.size() < 4)
        throw invalid_grid("remainder envelope needs at least four epsilon values");
    RemainderEnvelope out;
    out.N_max = N_max;
    std::vector<cplx> psi;
    for (cplx e : eps_grid)
        psi.push_back(ch.psi(ell, e));
    // log C_N over a sub-range of the grid.
    auto log_c = [&](std::size_t from, std::size_t to) {
        std::vector<double> lc;
        for (int N = 1; N <= N_max; ++N) {
            double best = -inf;
            for (std::size_t j = from; j < to; ++j) {
                cplx partial{0.0, 0.0};
                for (int p = 0; p < N; ++p)
                    partial += coeffs[static_cast<std::size_t>(p)] * std::pow(eps_grid[j], p);
                const double r = std::abs(psi[j] - partial);
                if (r > 0)
                    best = std::max(best, std::log(r) - seq.log_m(static_cast<std::size_t>(N)) -
                                              N * std::log(std::abs(eps_grid[j])));
            }
            lc.push_back(best);
        }
        return lc;
    };
    auto slope = [&](const std::vector<double> &lc) {
        std::vector<double> x, y;
        for (int N = 1; N <= N_max; ++N)
            if (std::isfinite(lc[static_cast<std::size_t>(N - 1)])) {
                x.push_back(N);
                y.push_back(lc[static_cast<std::size_t>(N - 1)]);
            }
        return x.size() >= 2 ? fit_line(x, y).slope : 0.0;
    };
    const std::size_t n = eps_grid.size();
    const auto all = log_c(0, n);
    out.delta2 = std::exp(slope(all));
    out.delta2_low = std::exp(slope(log_c(0, n / 2)));
    out.delta2_high = std::exp(slope(log_c(n / 2, n)));
    double l1 = -inf;
    for (int N = 1; N <= N_max; ++N)
        l1 = std::max(l1, all[static_cast<std::size_t>(N - 1)] - N * std::log(out.delta2));
    out.delta1 = std::exp(l1);
    out.holds = std::isfinite(l1);
    out.stable = std::abs(out.delta2_low / out.delta2 - 1) <= 0.2 && std::abs(out.delta2_high / out.delta2 - 1) <= 0.2;
    return out;
}

cplx RSDecomposition::a(std::size_t i, cplx eps) const {
    return G[i](eps) - psi1.psi(i, eps) - psi2.psi(i, eps);
}

std::size_t RSDecomposition::sector_of(cplx eps) const {
    const auto &cov = psi1.covering();
    std::size_t best = 0;
    double best_off = inf;
    for (std::size_t i = 0; i < cov.size(); ++i) {
        const double off = std::abs(cov[i].offset(std::arg(eps)));
        if (off < best_off) {
            best_off = off;
            best = i;
        }
    }
    return best;
}

RSDecomposition rs_decompose(std::vector<ComplexFunction> G, const GoodCovering &covering,
                             std::span<const Adjacency> verdicts, std::span<const std::vector<cplx>> overlap_grids,
                             const RSOptions &opt, std::vector<ComplexFunction> cocycle) {
    const std::size_t nu = covering.size();
    if (G.size() != nu || verdicts.size() != nu || overlap_grids.size() != nu)
        throw invalid_grid("rs_decompose needs one function, verdict and grid per sector");
    if (!cocycle.empty() && cocycle.size() != nu)
        throw invalid_grid("rs_decompose needs one cocycle function per overlap");
    std::vector<ComplexFunction> level1(nu), level2(nu);
    for (std::size_t i = 0; i < nu; ++i) {
        ComplexFunction delta = [gi = G[i], gj = G[(i + 1) % nu]](cplx e) { return gj(e) - gi(e); };
        if (!cocycle.empty())
            delta = cocycle[i] ? cocycle[i] : ComplexFunction{};
        (verdicts[i].singular_between ? level1 : level2)[i] = std::move(delta);
    }
    RSDecomposition out{G,
                        std::vector<Adjacency>(verdicts.begin(), verdicts.end()),
                        CauchyHeine(covering, level1, opt.r_tilde, opt.tol, opt.inner_cutoff),
                        CauchyHeine(covering, level2, opt.r_tilde, opt.tol, opt.inner_cutoff),
                        {},
                        {},
                        {},
                        0.0,
                        0.0,
                        {}};

    for (std::size_t i = 0; i < nu; ++i) {
        const std::size_t j = (i + 1) % nu;
        for (cplx e : overlap_grids[i]) {
            const cplx d1 = out.psi1.psi(j, e) - out.psi1.psi(i, e);
            const cplx d2 = out.psi2.psi(j, e) - out.psi2.psi(i, e);
            out.jump_residual = std::max(out.jump_residual, std::abs(d1 - out.psi1.cocycle(i, e)));
            out.jump_residual = std::max(out.jump_residual, std::abs(d2 - out.psi2.cocycle(i, e)));
            out.consistency = std::max(out.consistency, std::abs(out.a(j, e) - out.a(i, e)));
        }
    }
    const double allowed = 10 * std::max(opt.tol, 1e-9);
    if (out.consistency > allowed) {
        std::ostringstream msg;
        msg << "convergent part differs by " << out.consistency << " across overlaps (allowed " << allowed << ")";
        throw inconsistent_cocycle(msg.str());
    }

    out.coeffs1 = out.psi1.coefficients(opt.p_max);
    out.coeffs2 = out.psi2.coefficients(opt.p_max);
    // Taylor coefficients of a by the trapezoid rule on |ε| = r̃/2.
    constexpr int n = 64;
    const double rho = 0.5 * opt.r_tilde;
    std::vector<cplx> vals;
    for (int q = 0; q < n; ++q) {
        const cplx e = std::polar(rho, 2 * pi * (q + 0.5) / n);
        vals.push_back(out.a(out.sector_of(e), e));
    }
    for (int p = 0; p <= opt.p_max; ++p) {
        cplx s{0.0, 0.0};
        for (int q = 0; q < n; ++q)
            s += vals[static_cast<std::size_t>(q)] * std::polar(std::pow(rho, -p), -2 * pi * (q + 0.5) * p / n);
        out.a_coeffs.push_back(s / static_cast<double>(n));
    }
    if (opt.multisummable)
        out.tag = "(M, r1/s1)-sum decomposition";
    return out;
}

namespace {

// Slices indexed by z^β/β!: product with b(z) = Σ b_j z^j/j!.
std::vector<TruncatedSeries> z_product(std::span<const cplx> b, std::span<const TruncatedSeries> f, int top) {
    std::vector<TruncatedSeries> out;
    for (int beta = 0; beta <= top; ++beta) {
        TruncatedSeries acc = scale(f[0], 0.0);
        for (int j = 0; j <= beta && j < static_cast<int>(b.size()); ++j)
            if (b[static_cast<std::size_t>(j)] != cplx{0.0, 0.0})
                acc = acc + scale(f[static_cast<std::size_t>(beta - j)], binomial(beta, j) * b[static_cast<std::size_t>(j)]);
        out.push_back(std::move(acc));
    }
    return out;
}

// t^s ∂_t^{κ₀} applied to the slices κ₁.. of H.
std::vector<TruncatedSeries> term_slices(const BivariateSeries &H, const Term &t, int top, int t_order) {
    std::vector<TruncatedSeries> out;
    for (int beta = 0; beta <= top; ++beta) {
        TruncatedSeries s = H.slices[static_cast<std::size_t>(beta + t.kappa1)];
        for (int d = 0; d < t.kappa0; ++d)
            s = derive(s);
        out.push_back(shift(s, t.s).truncated(t_order));
    }
    return out;
}

TruncatedSeries irregular_power(TruncatedSeries s, int k, int s1, int t_order) {
    for (int i = 0; i < s1; ++i)
        s = irregular(s, k).truncated(t_order);
    return s;
}

// b_m(z) in the z^j/j! convention.
std::vector<cplx> b_slice(const BivariateSeries &b, int m) {
    if (m >= static_cast<int>(b.slices.size()))
        return {};
    const TruncatedSeries &s = b.slices[static_cast<std::size_t>(m)];
    std::vector<cplx> out;
    for (int j = 0; j <= s.order(); ++j)
        out.push_back(s.coeff(j) * factorial(j));
    return out;
}

} // namespace

std::vector<BivariateSeries> formal_solution_recursion(const ProblemSpec &spec,
                                                       std::span<const BivariateSeries> b_expansions,
                                                       std::span<const std::vector<TruncatedSeries>> H_init,
                                                       int L_max, const FormalOptions &opt) {
    if (b_expansions.size() != spec.terms.size())
        throw invalid_grid("one b expansion per term is required");
    for (const auto &b : b_expansions)
        if (!b.slices.empty() && !b.slices[0].is_zero())
            throw invalid_coefficient("b expansions must vanish at eps = 0");
    const int S = spec.S;
    const int top = opt.z_order - S;
    if (top < 0)
        throw nothing_to_do("z_order below S");
    std::vector<BivariateSeries> H;
    for (int ell = 0; ell <= L_max; ++ell) {
        if (static_cast<int>(H_init.size()) <= ell || static_cast<int>(H_init[static_cast<std::size_t>(ell)].size()) < S)
            throw underdetermined("missing z-initial slices for H_" + std::to_string(ell));
        std::vector<TruncatedSeries> R(static_cast<std::size_t>(top + 1), TruncatedSeries(Var::x, opt.t_order));
        for (std::size_t ti = 0; ti < spec.terms.size(); ++ti) {
            const Term &t = spec.terms[ti];
            for (int m = 1; m <= ell; ++m) {
                const auto b = b_slice(b_expansions[ti], m);
                if (b.empty())
                    continue;
                const auto g = term_slices(H[static_cast<std::size_t>(ell - m)], t, top, opt.t_order);
                const auto p = z_product(b, g, top);
                const double w = 1.0 / (factorial(m) * factorial(ell - m));
                for (int beta = 0; beta <= top; ++beta)
                    R[static_cast<std::size_t>(beta)] = R[static_cast<std::size_t>(beta)] + scale(p[static_cast<std::size_t>(beta)], w);
            }
        }
        if (ell >= spec.r1) {
            const auto &prev = H[static_cast<std::size_t>(ell - spec.r1)];
            const cplx w = (opt.extra_a_factor ? spec.a : cplx{1.0, 0.0}) / factorial(ell - spec.r1);
            for (int beta = 0; beta <= top; ++beta)
                R[static_cast<std::size_t>(beta)] =
                    R[static_cast<std::size_t>(beta)] -
                    scale(irregular_power(prev.slices[static_cast<std::size_t>(beta + S)], spec.k, spec.s1, opt.t_order), w);
        }
        BivariateSeries h;
        h.outer = Var::z;
        for (int j = 0; j < S; ++j)
            h.slices.push_back(H_init[static_cast<std::size_t>(ell)][static_cast<std::size_t>(j)].with_var(Var::x).truncated(opt.t_order));
        for (int beta = 0; beta <= top; ++beta)
            h.slices.push_back(scale(R[static_cast<std::size_t>(beta)], factorial(ell) / spec.a).truncated(opt.t_order));
        H.push_back(std::move(h));
    }
    return H;
}

double formal_residual(const ProblemSpec &spec, std::span<const BivariateSeries> b_expansions,
                       std::span<const BivariateSeries> H, const FormalOptions &opt) {
    const int S = spec.S;
    const int top = opt.z_order - S;
    double worst = 0.0;
    for (int ell = 0; ell < static_cast<int>(H.size()); ++ell) {
        for (int beta = 0; beta <= top; ++beta) {
            TruncatedSeries lhs = scale(H[static_cast<std::size_t>(ell)].slices[static_cast<std::size_t>(beta + S)], spec.a);
            TruncatedSeries rhs(Var::x, opt.t_order);
            std::vector<double> mag(static_cast<std::size_t>(opt.t_order + 1), 0.0);
            auto note = [&](const TruncatedSeries &s) {
                for (int n = 0; n <= std::min(s.order(), opt.t_order); ++n)
                    mag[static_cast<std::size_t>(n)] += std::abs(s.coeff(n));
            };
            note(lhs);
            if (ell >= spec.r1) {
                const TruncatedSeries q = scale(
                    irregular_power(H[static_cast<std::size_t>(ell - spec.r1)].slices[static_cast<std::size_t>(beta + S)], spec.k,
                                    spec.s1, opt.t_order),
                    factorial(ell) / factorial(ell - spec.r1));
                note(q);
                lhs = lhs + q;
            }
            for (std::size_t ti = 0; ti < spec.terms.size(); ++ti) {
                const Term &t = spec.terms[ti];
                for (int m = 1; m <= ell; ++m) {
                    const auto b = b_slice(b_expansions[ti], m);
                    for (int j = 0; j <= beta && j < static_cast<int>(b.size()); ++j) {
                        if (b[static_cast<std::size_t>(j)] == cplx{0.0, 0.0})
                            continue;
                        TruncatedSeries s =
                            H[static_cast<std::size_t>(ell - m)].slices[static_cast<std::size_t>(beta - j + t.kappa1)];
                        for (int d = 0; d < t.kappa0; ++d)
                            s = derive(s);
                        s = scale(shift(s, t.s), binomial(ell, m) * binomial(beta, j) * b[static_cast<std::size_t>(j)])
                                .truncated(opt.t_order);
                        note(s);
                        rhs = rhs + s;
                    }
                }
            }
            const int reliable = std::min({lhs.order(), rhs.order(), opt.t_order});
            for (int n = 0; n <= reliable; ++n) {
                const double sc = mag[static_cast<std::size_t>(n)];
                if (sc > 0)
                    worst = std::max(worst, std::abs(lhs.coeff(n) - rhs.coeff(n)) / sc);
            }
        }
    }
    return worst;
}

} // namespace msl
