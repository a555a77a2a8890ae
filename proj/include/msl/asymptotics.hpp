#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msl/borel_solver.hpp"
#include "msl/geometry.hpp"
#include "msl/seqcore.hpp"

namespace msl {

using ComplexFunction = std::function<cplx(cplx)>;

struct CocycleSample {
    int overlap = 0;
    std::vector<std::pair<cplx, cplx>> samples;
    std::string provenance;
};

enum class FlatnessModel { gevrey, hm, none };

std::string_view model_name(FlatnessModel m);

struct FlatnessReport {
    FlatnessModel model = FlatnessModel::none;
    // Gevrey branch: |Δ| ≤ K1·exp(−M1/|ε|^alpha).
    double alpha = 0.0;
    double M1 = 0.0;
    double K1 = 0.0;
    double gevrey_residual = std::numeric_limits<double>::infinity();
    // h_M branch: |Δ| ≤ C·h_M(K|ε|).
    std::string seq;
    double C = 0.0;
    double K = 0.0;
    double hm_residual = std::numeric_limits<double>::infinity();
    // Residual of the chosen model, max |log10 deviation| from the fit.
    double residual = std::numeric_limits<double>::infinity();
    std::size_t sample_count = 0;
    double eps_min = 0.0;
    double eps_max = 0.0;
    bool zero_envelope = false;
    std::vector<std::string> notes;
};

FlatnessReport fit_flatness(const CocycleSample &samples, const SequenceSpec *candidate_seq);
std::string to_json(const FlatnessReport &r);

struct SplitCocycle {
    std::vector<CocycleSample> level1;
    std::vector<CocycleSample> level2;
};

SplitCocycle split_cocycle(std::span<const CocycleSample> deltas, std::span<const Adjacency> verdicts);

// ψ_ℓ(ε) = (1/2πi) Σ_h ∫_{C_h} f_h(ξ)/(ξ − ε) dξ over the segments
// C_h = [0, r̃]·e^{iθ_h}, θ_h the mid-angle of E_h ∩ E_{h+1}, so that
// ψ_{h+1} − ψ_h = f_h on that overlap.
class CauchyHeine {
public:
    // cocycle[h] lives on E_h ∩ E_{h+1}; an empty function means zero.
    CauchyHeine(GoodCovering covering, std::vector<ComplexFunction> cocycle, double r_tilde, double tol = 1e-11,
                double inner_cutoff = 0.0);

    cplx psi(std::size_t ell, cplx eps) const;
    // (1/2πi) Σ_h ∫_{C_h} f_h(ξ) ξ^{−p−1} dξ.
    cplx coefficient(int p) const;
    std::vector<cplx> coefficients(int p_max) const;

    const GoodCovering &covering() const { return covering_; }
    double ray(std::size_t h) const { return rays_[h]; }
    double r_tilde() const { return r_tilde_; }
    double tol() const { return tol_; }
    bool is_zero() const;
    cplx cocycle(std::size_t h, cplx xi) const;

private:
    cplx ray_integral(std::size_t h, double theta, cplx eps) const;
    cplx arc_integral(std::size_t h, double from, double to, cplx eps) const;

    GoodCovering covering_;
    std::vector<ComplexFunction> cocycle_;
    std::vector<double> rays_;
    double r_tilde_;
    double tol_;
    double inner_cutoff_;
};

struct RemainderEnvelope {
    int N_max = 0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta2_low = 0.0;
    double delta2_high = 0.0;
    bool stable = false;
    bool holds = false;
};

// |ψ_ℓ(ε) − Σ_{p<N} a_p ε^p| ≤ Δ₁Δ₂^N M_N |ε|^N fitted over N = 1..N_max;
// Δ₂ is also fitted on the lower and upper halves of the grid.
RemainderEnvelope remainder_envelope(const CauchyHeine &ch, std::size_t ell, std::span<const cplx> coeffs,
                                     const SequenceSpec &seq, std::span<const cplx> eps_grid, int N_max);

struct RSDecomposition {
    std::vector<ComplexFunction> G;
    std::vector<Adjacency> verdicts;
    CauchyHeine psi1;
    CauchyHeine psi2;
    std::vector<cplx> coeffs1;
    std::vector<cplx> coeffs2;
    // Taylor coefficients of the convergent part.
    std::vector<cplx> a_coeffs;
    double consistency = 0.0;
    double jump_residual = 0.0;
    std::string tag;

    cplx a(std::size_t i, cplx eps) const;
    // Sector whose bisector is angularly closest to arg ε.
    std::size_t sector_of(cplx eps) const;
};

struct RSOptions {
    double r_tilde = 0.5;
    double tol = 1e-11;
    int p_max = 8;
    double inner_cutoff = 0.0;
    bool multisummable = false;
};

// overlap_grids[i] samples E_i ∩ E_{i+1}. `cocycle`, when given, replaces
// G_{i+1} − G_i inside the integrals; G still decides the consistency check.
RSDecomposition rs_decompose(std::vector<ComplexFunction> G, const GoodCovering &covering,
                             std::span<const Adjacency> verdicts, std::span<const std::vector<cplx>> overlap_grids,
                             const RSOptions &opt, std::vector<ComplexFunction> cocycle = {});

struct FormalOptions {
    int t_order = 12;
    int z_order = 8;
    // Multiplies the (t^{k+1}∂_t)^{s₁} term by a as well.
    bool extra_a_factor = false;
};

// b_expansions[term]: outer variable ε, slices[m] = b_m(z) with ordinary z-coefficients.
// H_init[ℓ][j]: the z^j/j! coefficient of H_ℓ, a series in t, for j < S.
// Returns H_ℓ for ℓ = 0..L_max, slices in t indexed by z^β/β!.
std::vector<BivariateSeries> formal_solution_recursion(const ProblemSpec &spec,
                                                       std::span<const BivariateSeries> b_expansions,
                                                       std::span<const std::vector<TruncatedSeries>> H_init,
                                                       int L_max, const FormalOptions &opt);

// Coefficient mismatch of the formal equation at every ε^ℓ, relative to the
// size of the matched terms.
double formal_residual(const ProblemSpec &spec, std::span<const BivariateSeries> b_expansions,
                       std::span<const BivariateSeries> H, const FormalOptions &opt);

} // namespace msl
