#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace msl {

// A candidate strongly regular sequence M_p, M_0 = 1, handled through log M_p.
class SequenceSpec {
public:
    enum class Kind { gevrey, logmod, table };

    static SequenceSpec gevrey(double alpha);
    static SequenceSpec logmod(double alpha, double beta);
    static SequenceSpec table(std::vector<double> log_values);
    // `gevrey 0.5`, `logmod 1.0 1.0` or `table <path>`.
    static SequenceSpec parse(std::string_view text);

    Kind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    std::string describe() const;

    // log M_p; extends the cache on demand. Throws invalid_sequence past the
    // end of a table.
    double log_m(std::size_t p) const;
    // Largest index for which log M_p is defined.
    std::size_t p_limit() const;

    SequenceSpec(const SequenceSpec &other);
    SequenceSpec &operator=(const SequenceSpec &other);
    SequenceSpec(SequenceSpec &&) noexcept = default;
    SequenceSpec &operator=(SequenceSpec &&) noexcept = default;

private:
    SequenceSpec(Kind kind, double alpha, double beta, std::vector<double> log_values);
    void extend(std::size_t p) const;

    Kind kind_;
    double alpha_ = 0.0;
    double beta_ = 0.0;
    mutable std::vector<double> log_m_;
    mutable std::unique_ptr<std::mutex> guard_ = std::make_unique<std::mutex>();
};

struct AxiomFailure {
    std::string axiom;
    std::size_t p;
    std::string detail;
};

struct RegularityReport {
    std::size_t p_max = 0;
    bool alpha0_ok = false;
    bool mu_ok = false;
    double witness_a = 0.0;
    bool gamma1_ok = false;
    // Witness needed on [0, p_max) and its extrapolation over further range
    // doublings; the latter decides gamma1_ok.
    double witness_b_range = 0.0;
    double witness_b = 0.0;
    std::vector<AxiomFailure> failures;
    std::string scope;
};

RegularityReport check_strong_regularity(const SequenceSpec &seq, std::size_t p_max);

struct HmValue {
    double value;
    std::size_t argmin;
    double log_value;
};

inline constexpr std::size_t default_p_scan_max = 1'000'000;

// inf_p M_p t^p by forward scan; h_m(0) = 0.
HmValue h_m_scan(const SequenceSpec &seq, double t,
                 std::size_t p_scan_max = default_p_scan_max);
double h_m(const SequenceSpec &seq, double t,
           std::size_t p_scan_max = default_p_scan_max);
// log h_M(t), finite where h_m underflows.
double log_h_m(const SequenceSpec &seq, double t,
               std::size_t p_scan_max = default_p_scan_max);

struct OmegaEstimate {
    double value;
    double error;
    // The plain quotient at the largest subsequence index.
    double last_quotient;
};

OmegaEstimate omega_estimate(const SequenceSpec &seq, std::size_t n_max);

struct MomentResult {
    double value;
    double tail_bound;
    double t_end;
};

// ∫_0^∞ t^{p-1} h_M(K1/t) dt on a geometric grid with an explicit tail bound.
MomentResult moment_integral(const SequenceSpec &seq, int p, double k1,
                             double rel_tol = 1e-10);
double moment(const SequenceSpec &seq, int p, double k1);

struct EnvelopeResult {
    bool holds;
    double k_prime;
    // Slope of log K'(ε) against log ε over the grid; positive means the
    // pointwise constant collapses as ε → 0.
    double trend;
    std::vector<double> pointwise;
};

EnvelopeResult hm_gevrey_envelope(const SequenceSpec &seq, double rk, double k2,
                                  std::span<const double> eps_grid);

} // namespace msl
