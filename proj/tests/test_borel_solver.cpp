#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>

#include "doctest.h"
#include "msl/borel_solver.hpp"
#include "msl/config.hpp"
#include "msl/errors.hpp"

using namespace msl;

namespace {

const std::filesystem::path configs = std::filesystem::path(MSL_SOURCE_DIR) / "configs";

ProblemSpec small_spec() {
    ProblemSpec p;
    p.k = 2;
    p.s1 = 1;
    p.r1 = 2;
    p.S = 2;
    p.terms = {{2, 0, 0, 2}, {5, 1, 1, 2}};
    return p;
}

} // namespace

TEST_CASE("inverse_d_series inverts the polynomial") {
    for (int s1 : {1, 2})
        for (cplx a : {cplx{1.0, 0.0}, cplx{0.5, -1.5}}) {
            ProblemSpec p = small_spec();
            p.s1 = s1;
            p.a = a;
            const int N = 30;
            const TruncatedSeries prod = (inverse_d_series(p, N) * d_polynomial(p, N)).truncated(N);
            CHECK(std::abs(prod.coeff(0) - 1.0) < 1e-14);
            for (int n = 1; n <= N; ++n)
                CHECK(std::abs(prod.coeff(n)) < 1e-12);
        }
}

TEST_CASE("eps_power_neg_r uses the principal root") {
    ProblemSpec p = small_spec();
    p.r1 = 1; // r = 1/2
    CHECK(std::abs(eps_power_neg_r(p, cplx{-1.0, 0.0}, 1) - cplx{0.0, -1.0}) < 1e-14);
    CHECK(std::abs(eps_power_neg_r(p, cplx{0.25, 0.0}, 2) - 4.0) < 1e-13);
}

TEST_CASE("solve_recursion input errors") {
    const ExperimentConfig cfg = load_config(configs / "demo.conf");
    CHECK_THROWS_AS(solve_recursion(*cfg.problem, cfg.sectors[0], 0.0, 8, 20), singular_parameter);
    CHECK_THROWS_AS(solve_recursion(*cfg.problem, cfg.sectors[0], 0.1, 1, 20), nothing_to_do);
}

TEST_CASE("the demo recursion satisfies its own equation") {
    const ExperimentConfig cfg = load_config(configs / "demo.conf");
    for (std::size_t i = 0; i < cfg.sector_count(); ++i)
        for (cplx e : cfg.sector_eps(i)) {
            const BorelSolution sol = solve_recursion(*cfg.problem, cfg.sectors[i], e, 12, 40);
            CHECK(sol.N_z() == 12);
            CHECK(borel_residual(*cfg.problem, cfg.sectors[i], sol) < 1e-10);
        }
}

TEST_CASE("weighted norm is homogeneous and matches the weight formula") {
    const WeightParams wp{1.0, 1.2, 1.0, 2};
    const cplx eps{0.2, 0.1};
    const auto grid = omega_grid(eps, wp, 0.3);
    auto h = [](cplx t) { return t * std::exp(t); };
    const NormValue one = weighted_norm(h, 3, eps, grid, wp);
    const NormValue two = weighted_norm([&](cplx t) { return cplx{0.0, 2.0} * h(t); }, 3, eps, grid, wp);
    CHECK(two.value == doctest::Approx(2 * one.value).epsilon(1e-14));

    const cplx tau = one.argmax;
    const double x = std::abs(tau) / std::abs(eps);
    const double rb = 1.0 + std::pow(2.0, -1.2) + std::pow(3.0, -1.2) + std::pow(4.0, -1.2);
    const double w = (1 + std::pow(x, 4)) / x * std::exp(-rb * x * x);
    CHECK(one.value == doctest::Approx(w * std::abs(h(tau))).epsilon(1e-12));
    for (cplx t : grid)
        CHECK(std::abs(t) <= 0.3 * (1 + 1e-12));
    CHECK_THROWS_AS(weighted_norm(h, 0, eps, std::vector<cplx>{}, wp), invalid_grid);
}

TEST_CASE("xi_b against the zeta function") {
    for (double b : {1.1, 1.2, 2.0, 3.5}) {
        const WeightParams wp{1.0, b, 1.0, 2};
        double tail = 0.0;
        CHECK(wp.xi_b(&tail) == doctest::Approx(boost::math::zeta(b)).epsilon(1e-12));
        CHECK(tail < 1e-12);
    }
}

TEST_CASE("majorant grows with the aggregate constant") {
    const ProblemSpec p = small_spec();
    const std::vector<double> init{0.5, 0.7};
    std::vector<double> prev;
    for (double C : {0.01, 0.1, 1.0, 10.0}) {
        const MajorantResult m = majorant_coeffs(p, 1.0, 1.0, init, 20, C);
        CHECK(m.u.size() == 21);
        CHECK(m.u[0] == 0.5);
        CHECK(m.u[1] == 0.7);
        if (!prev.empty())
            for (std::size_t b = 0; b < m.u.size(); ++b)
                CHECK(m.u[b] >= prev[b]);
        prev = m.u;
    }
    CHECK(majorant_eta(p, p.terms[1]) == static_cast<int>(std::floor(1.2 * (1.0 + 1 + 1))) - 1);
}

TEST_CASE("find_dominating_constant returns a dominating C") {
    const ProblemSpec p = small_spec();
    const std::vector<double> init{0.5, 0.7};
    // Norms sitting under the C = 3 majorant: the answer is at most 3.
    std::vector<double> norms = majorant_coeffs(p, 1.0, 1.0, init, 16, 3.0).u;
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> shrink(0.5, 1.0);
    for (std::size_t b = 2; b < norms.size(); ++b)
        norms[b] *= shrink(rng);
    const DominationResult d = find_dominating_constant(p, 1.0, 1.0, norms);
    REQUIRE(d.found);
    CHECK(d.C <= 3.0);
    const MajorantResult m = majorant_coeffs(p, 1.0, 1.0, std::span<const double>(norms).first(2), 16, d.C);
    for (std::size_t b = 0; b < norms.size(); ++b)
        CHECK(norms[b] <= m.u[b] * (1 + 1e-12));
    // Slightly smaller C must fail somewhere.
    const MajorantResult less = majorant_coeffs(p, 1.0, 1.0, std::span<const double>(norms).first(2), 16, d.C * 0.9);
    bool some_fail = false;
    for (std::size_t b = 0; b < norms.size(); ++b)
        some_fail = some_fail || norms[b] > less.u[b];
    CHECK(some_fail);
}

TEST_CASE("factorial envelope of a known sequence") {
    std::vector<double> u;
    for (int b = 0; b <= 30; ++b)
        u.push_back(3.0 * std::pow(2.0, b) * std::tgamma(b + 1.0));
    const GeometricEnvelope env = fit_factorial_envelope(u);
    CHECK(env.verified);
    CHECK(env.Z0 == doctest::Approx(2.1).epsilon(1e-12));
    for (int b = 0; b <= 30; ++b)
        CHECK(u[static_cast<std::size_t>(b)] <= env.Z1 * std::pow(env.Z0, b) * std::tgamma(b + 1.0) * (1 + 1e-12));
    CHECK_THROWS_AS(fit_factorial_envelope(std::vector<double>{1.0, 2.0}), invalid_grid);
}

TEST_CASE("validate_spec lists every violation") {
    CHECK(validate_spec(small_spec()).ok);
    ProblemSpec p = small_spec();
    p.k = 1;
    p.a = 0.0;
    p.b_weight = 1.0;
    p.terms.push_back({3, 0, 2, 1});
    const SpecReport r = validate_spec(p);
    CHECK_FALSE(r.ok);
    CHECK(r.violations.size() >= 4);

    SectorData d;
    d.init = {{TruncatedSeries::monomial(Var::tau, 0, 1.0, 5), EpsExpr::constant({1.0, 0.0})}};
    d.b[{0, 0}] = EpsExpr::constant({1.0, 0.0});
    const SpecReport rd = validate_spec(small_spec(), d);
    CHECK_FALSE(rd.ok);
    CHECK(rd.violations.size() == 3);
}
