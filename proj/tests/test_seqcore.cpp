#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "doctest.h"
#include "msl/errors.hpp"
#include "msl/seqcore.hpp"

using namespace msl;

namespace {

// min_p M_p t^p by brute force over p ≤ p_max.
double scan_oracle(const SequenceSpec &s, double t, int p_max) {
    double best = INFINITY;
    for (int p = 0; p <= p_max; ++p)
        best = std::min(best, s.log_m(static_cast<std::size_t>(p)) + p * std::log(t));
    return std::exp(best);
}

} // namespace

TEST_CASE("sequence constructors and parsing") {
    const SequenceSpec g = SequenceSpec::parse("gevrey 1.5");
    CHECK(g.kind() == SequenceSpec::Kind::gevrey);
    CHECK(g.log_m(7) == doctest::Approx(1.5 * std::lgamma(8.0)));
    CHECK(g.log_m(0) == 0.0);

    const SequenceSpec lm = SequenceSpec::logmod(1.0, 2.0);
    double beta_sum = 0.0;
    for (int q = 1; q <= 30; ++q)
        beta_sum += 2.0 * std::log(std::log(std::exp(1.0) + q));
    CHECK(lm.log_m(30) == doctest::Approx(std::lgamma(31.0) + beta_sum).epsilon(1e-12));

    CHECK_THROWS_AS(SequenceSpec::gevrey(0.0), invalid_sequence);
    CHECK_THROWS_AS(SequenceSpec::parse("fibonacci 2"), invalid_sequence);
    CHECK_THROWS_AS(SequenceSpec::table({0.0, 1.0}), invalid_sequence);
    CHECK_THROWS_AS(SequenceSpec::table({0.5, 1.0, 2.0}), invalid_sequence);
}

TEST_CASE("table sequences load from disk and end where the table ends") {
    const auto path = std::filesystem::temp_directory_path() / "msl_seq_table.txt";
    {
        std::ofstream out(path);
        for (int p = 0; p <= 10; ++p)
            out << std::lgamma(p + 1.0) << "\n";
    }
    const SequenceSpec t = SequenceSpec::parse("table " + path.string());
    CHECK(t.p_limit() == 10);
    CHECK(t.log_m(10) == doctest::Approx(std::lgamma(11.0)));
    CHECK_THROWS_AS(t.log_m(11), invalid_sequence);
    std::filesystem::remove(path);
}

TEST_CASE("h_m matches an exhaustive scan") {
    CHECK(h_m(SequenceSpec::gevrey(1.0), 0.1) == doctest::Approx(3.6288e-4).epsilon(1e-12));
    std::mt19937 rng(3);
    // gevrey(1/2) needs p ~ t^{-2} terms; keep the oracle affordable.
    std::uniform_real_distribution<double> lt(-2.4, 0.5);
    for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
        const SequenceSpec s = SequenceSpec::gevrey(alpha);
        for (int i = 0; i < 20; ++i) {
            const double t = std::pow(10.0, lt(rng));
            CHECK(h_m(s, t) == doctest::Approx(scan_oracle(s, t, 200000)).epsilon(1e-10));
        }
    }
    CHECK(h_m(SequenceSpec::gevrey(1.0), 0.0) == 0.0);
}

TEST_CASE("h_m is non-decreasing and bounded by one") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> lt(-3.0, 1.0);
    const SequenceSpec seqs[] = {SequenceSpec::gevrey(0.7), SequenceSpec::gevrey(2.0), SequenceSpec::logmod(1.0, 1.0)};
    for (const auto &s : seqs)
        for (int i = 0; i < 100; ++i) {
            double a = std::pow(10.0, lt(rng)), b = std::pow(10.0, lt(rng));
            if (a > b)
                std::swap(a, b);
            CHECK(h_m(s, a) <= h_m(s, b) * (1 + 1e-14));
            CHECK(h_m(s, b) <= 1.0);
        }
}

TEST_CASE("gevrey argmin sits at the last decreasing step") {
    // M_p t^p decreases from p−1 to p while p^α t < 1.
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> lt(-2.5, -0.1);
    for (double alpha : {0.5, 1.0, 1.5, 2.0})
        for (int i = 0; i < 30; ++i) {
            const double t = std::pow(10.0, lt(rng));
            const HmValue h = h_m_scan(SequenceSpec::gevrey(alpha), t);
            const auto p = static_cast<double>(h.argmin);
            CHECK(std::pow(p, alpha) * t <= 1.0 + 1e-12);
            CHECK(std::pow(p + 1, alpha) * t > 1.0 - 1e-12);
        }
}

TEST_CASE("log_h_m stays finite where h_m underflows") {
    const SequenceSpec s = SequenceSpec::gevrey(1.0);
    CHECK(h_m(s, 1e-4) == 0.0);
    const double l = log_h_m(s, 1e-4);
    CHECK(std::isfinite(l));
    double best = INFINITY;
    for (int p = 0; p <= 100000; ++p)
        best = std::min(best, std::lgamma(p + 1.0) + p * std::log(1e-4));
    CHECK(l == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("unbounded scans are reported") {
    CHECK_THROWS_AS(h_m(SequenceSpec::gevrey(0.1), 1e-3), unbounded_scan);
}

TEST_CASE("omega_estimate recovers the gevrey index") {
    for (double alpha : {0.5, 1.0, 2.0, 3.5}) {
        const OmegaEstimate om = omega_estimate(SequenceSpec::gevrey(alpha), 10000);
        CHECK(std::abs(om.value - alpha) <= 0.02 * alpha);
    }
}

TEST_CASE("strong regularity verdicts") {
    const RegularityReport g = check_strong_regularity(SequenceSpec::gevrey(1.0), 2000);
    CHECK(g.alpha0_ok);
    CHECK(g.mu_ok);
    CHECK(g.gamma1_ok);

    std::vector<double> geometric;
    for (int p = 0; p < 400; ++p)
        geometric.push_back(p * std::log(2.0));
    const RegularityReport geo = check_strong_regularity(SequenceSpec::table(geometric), 300);
    CHECK(geo.alpha0_ok);
    CHECK_FALSE(geo.gamma1_ok);

    const RegularityReport bad =
        check_strong_regularity(SequenceSpec::table({0, 1, 1.5, 1.6, 3, 5, 8, 12, 17}), 8);
    CHECK_FALSE(bad.alpha0_ok);
    CHECK_FALSE(bad.failures.empty());
}

TEST_CASE("moment integral against the piecewise closed form") {
    // gevrey(1): h_M(1/t) = n!/t^n on [n, n+1), 1 on (0, 1).
    for (int p : {1, 2, 3}) {
        double want = 1.0 / p;
        for (int n = 1; n < 80; ++n) {
            const double e = p - n;
            const double span = e == 0 ? std::log((n + 1.0) / n) : (std::pow(n + 1.0, e) - std::pow(n, e)) / e;
            want += std::exp(std::lgamma(n + 1.0)) * span;
        }
        const MomentResult m = moment_integral(SequenceSpec::gevrey(1.0), p, 1.0);
        CHECK(m.value == doctest::Approx(want).epsilon(1e-9));
        CHECK(m.tail_bound < 1e-9 * m.value);
    }
    CHECK_THROWS_AS(moment_integral(SequenceSpec::gevrey(1.0), 0, 1.0), invalid_grid);
}

TEST_CASE("h_M versus Gevrey envelope") {
    std::vector<double> grid;
    for (int j = 0; j < 12; ++j)
        grid.push_back(std::pow(10.0, -1.0 - 3.0 * j / 11));
    const EnvelopeResult yes = hm_gevrey_envelope(SequenceSpec::gevrey(1.0), 0.5, 1.0, grid);
    CHECK(yes.holds);
    CHECK(yes.k_prime > 0);
    const EnvelopeResult no = hm_gevrey_envelope(SequenceSpec::gevrey(1.0), 2.0, 1.0, grid);
    CHECK_FALSE(no.holds);
    // K' is the binding pointwise constant.
    for (std::size_t j = 0; j < grid.size(); ++j)
        CHECK(yes.k_prime <= yes.pointwise[j]);
    const std::vector<double> one{1.0};
    const EnvelopeResult single = hm_gevrey_envelope(SequenceSpec::gevrey(1.0), 0.5, 1.0, one);
    CHECK(single.k_prime == doctest::Approx(-std::log(h_m(SequenceSpec::gevrey(1.0), 1.0))));
    const std::vector<double> bad{0.1, 0.0};
    CHECK_THROWS_AS(hm_gevrey_envelope(SequenceSpec::gevrey(1.0), 0.5, 1.0, bad), invalid_grid);
    CHECK_THROWS_AS(hm_gevrey_envelope(SequenceSpec::gevrey(1.0), 0.5, 1.0, std::vector<double>{}), invalid_grid);
}
