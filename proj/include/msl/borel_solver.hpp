#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msl/eps_expr.hpp"
#include "msl/fps.hpp"
#include "msl/seqcore.hpp"

namespace msl {

// Index triple (s, κ₀, κ₁) of one summand, with its δ_{κ₀}.
struct Term {
    int s = 0;
    int kappa0 = 0;
    int kappa1 = 0;
    int delta = 0;
};

struct ProblemSpec {
    int k = 2;
    int s1 = 1;
    int r1 = 1;
    int S = 1;
    cplx a{1.0, 0.0};
    double sigma = 1.0;
    double b_weight = 1.2;
    std::vector<Term> terms;

    double r() const { return static_cast<double>(r1) / (s1 * k); }
    // r in lowest terms.
    std::pair<int, int> r_fraction() const;
    // |τ| bound of inverse_d_series convergence.
    double pole_modulus() const;
};

struct InitialSlice {
    TruncatedSeries series{Var::tau, 0};
    EpsExpr scale = EpsExpr::constant({1.0, 0.0});
};

struct SectorData {
    int index = 0;
    // (term index, β) → b_{term,β}(ε); absent entries are zero.
    std::map<std::pair<int, int>, EpsExpr> b;
    std::vector<InitialSlice> init;

    cplx b_coeff(int term, int beta, cplx eps) const;
    int max_beta() const;
};

struct SpecReport {
    bool ok = true;
    std::vector<std::string> violations;
};

SpecReport validate_spec(const ProblemSpec &spec, const SectorData &data);
SpecReport validate_spec(const ProblemSpec &spec);

// Taylor series of 1/((kτ^k)^{s₁} + a) through degree N.
TruncatedSeries inverse_d_series(const ProblemSpec &spec, int N);
// Exact polynomial (kτ^k)^{s₁} + a.
TruncatedSeries d_polynomial(const ProblemSpec &spec, int N);

// Largest τ-order worth keeping on the disc |τ| ≤ rho0: half the order at
// which (rho0/pole_modulus)^N falls below double precision.
int default_n_tau(const ProblemSpec &spec, double rho0);

struct BorelSolution {
    cplx epsilon;
    std::vector<TruncatedSeries> W;
    int N_tau = 0;
    std::string branch = "principal branch of eps^(1/(s1*k))";

    int N_z() const { return static_cast<int>(W.size()) - 1; }
};

// ε^{−r·m} via the principal branch of ε^{1/(s₁k)}.
cplx eps_power_neg_r(const ProblemSpec &spec, cplx eps, int m);

BorelSolution solve_recursion(const ProblemSpec &spec, const SectorData &data, cplx epsilon,
                              int N_z, int N_tau);

// Largest coefficient mismatch of the Borel-plane equation (multiplied by D)
// relative to the size of the matched terms, over every β and reliable degree.
double borel_residual(const ProblemSpec &spec, const SectorData &data, const BorelSolution &sol);

struct MajorantResult {
    std::vector<double> u;
    std::vector<std::string> warnings;
};

// η = ⌊b(δ/k + κ₀ + 1)⌋ − 1.
int majorant_eta(const ProblemSpec &spec, const Term &t);
// k^{κ₀}/Γ(δ/k) + Σ_p |A_{κ₀,p}| k^p / Γ((δ + k(κ₀ − p))/k).
double majorant_d(const ProblemSpec &spec, const Term &t);

// Coefficients bounded by B_β = c1·c2^β·β!; C is the aggregate constant.
MajorantResult majorant_coeffs(const ProblemSpec &spec, double c1, double c2,
                               std::span<const double> w_init, int N_z, double C);

struct WeightParams {
    double sigma = 1.0;
    double b_weight = 1.2;
    double r = 1.0;
    int k = 2;

    static WeightParams from(const ProblemSpec &spec) {
        return {spec.sigma, spec.b_weight, spec.r(), spec.k};
    }
    double r_b(int beta) const;
    // Σ_{n≥0}(n+1)^{−b} with `tail_bound` the half-width of the tail bracket.
    double xi_b(double *tail_bound = nullptr) const;
};

using TauFunction = std::function<cplx(cplx)>;

struct NormValue {
    double value = 0.0;
    cplx argmax{0.0, 0.0};
    // The sup runs over grid points only.
    bool lower_estimate = true;
};

NormValue weighted_norm(const TauFunction &h, int beta, cplx epsilon, std::span<const cplx> omega_grid,
                        const WeightParams &wp);

// Sample of D(0, rho0) ∪ directions: radii geometric in x = |τ/ε^r| on
// [x_min, x_max], clipped to |τ| ≤ rho0, on n_dir directions.
std::vector<cplx> omega_grid(cplx epsilon, const WeightParams &wp, double rho0, int n_dir = 16,
                             int n_rad = 48, double x_min = 1e-3, double x_max = 8.0);

struct NormRow {
    int beta;
    cplx epsilon;
    double norm;
};

std::vector<NormRow> solution_norms(const BorelSolution &sol, const WeightParams &wp, double rho0);
std::string norms_csv(std::span<const NormRow> rows);

// Fits c1·c2^β·β! ≥ u_β; returns the smallest aggregate C (bisection)
// making the majorant dominate the given norms on β ≤ N_z, or +inf.
struct DominationResult {
    bool found = false;
    double C = 0.0;
    std::vector<double> u;
    std::vector<double> w;
};

DominationResult find_dominating_constant(const ProblemSpec &spec, double c1, double c2,
                                          std::span<const double> norms, double C_max = 1e12);

struct GeometricEnvelope {
    double Z0 = 0.0;
    double Z1 = 0.0;
    bool verified = false;
};

// u_β ≤ Z1·Z0^β·β! on the supplied range.
GeometricEnvelope fit_factorial_envelope(std::span<const double> u);

struct CocycleNormReport {
    bool degenerate = false;
    double c0 = 0.0;
    double c1 = 0.0;
    double K2 = 0.0;
    // log10 residual of the h_M profile fit.
    double residual = 0.0;
    std::vector<double> eps_modulus;
    // max_β norm_β / (c0^β β!) per ε.
    std::vector<double> profile;
};

// pairs[j] = (sol_i, sol_{i+1}) at the j-th grid point.
CocycleNormReport cocycle_norm_check(std::span<const std::pair<BorelSolution, BorelSolution>> pairs,
                                     const SequenceSpec &seq, const WeightParams &wp, double rho0);

std::string solution_to_text(const BorelSolution &sol);

} // namespace msl
