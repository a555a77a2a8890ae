#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msl/borel_solver.hpp"
#include "msl/geometry.hpp"

namespace msl {

struct RayQuadrature {
    double gamma = 0.0;
    double R_max = 1.0;
    // Δ in cos(k(γ − arg T)) ≥ Δ.
    double cone_margin = 0.1;
    int max_panels = 1 << 16;
};

// |w(u)| ≤ C·|u|^d for |u| ≥ R_max along the ray.
struct GrowthEnvelope {
    double C = 0.0;
    double d = 1.0;
};

// Γ(n/k)·T^n.
cplx laplace_monomial(int n, int k, cplx T);

struct LaplaceResult {
    cplx value;
    double tail_bound = 0.0;
    // |difference| of the last two panel refinements.
    double error = 0.0;
    int panels = 0;
};

// k∫₀^{R_max} w(s e^{iγ}) exp(−(s e^{iγ}/T)^k) ds/s with the tail past R_max
// bounded through `growth`; tol is relative to max(|value|, scale).
LaplaceResult laplace_ray_numeric(const TauFunction &w, const RayQuadrature &rq, cplx T, int k, double tol,
                                  const GrowthEnvelope &growth, double scale = 0.0);

// numerator(τ) / ((kτ^k)^{s₁} + a)^power.
struct RationalKernel {
    TruncatedSeries numerator{Var::tau, 0};
    int power = 1;
    int k = 2;
    int s1 = 1;
    cplx a{1.0, 0.0};

    SingularSet singular_set() const { return singular_directions(k, s1, a); }
    // Envelope valid for |u| ≥ R ≥ 2·pole modulus.
    GrowthEnvelope growth(double R) const;
    // Taylor series about 0 through degree N.
    TruncatedSeries taylor(int N) const;
};

cplx eval_rational_kernel(const RationalKernel &rk, cplx tau);

// Residue at `pole` of u ↦ k·w(u)·exp(−(u/T)^k)/u.
cplx laplace_residue(const RationalKernel &rk, cplx T, cplx pole);

// Σ over the poles strictly inside the counter-clockwise wedge from γ₁ to γ₂
// of −2πi·residue: the value of ∫_{γ₂} − ∫_{γ₁}.
cplx crossed_residue_sum(const RationalKernel &rk, cplx T, double gamma1, double gamma2);

enum class EvalMode { termwise_exact, ray_numeric };

struct SolutionEvaluator {
    ProblemSpec spec;
    SectorData data;
    double gamma = 0.0;
    int N_z = 8;
    int N_tau = 32;
    RayQuadrature quad;
    double tol = 1e-10;
    std::optional<Sector> t_sector;
    // When set, W_0 is this kernel and no z-dependence is present.
    std::optional<RationalKernel> kernel;
};

struct EvalResult {
    cplx value;
    // Size of the last retained z- and τ-terms.
    double truncation = 0.0;
    double tail_bound = 0.0;
    // 1/(2·Z₀) from the root test on the solved coefficients.
    double z_radius = std::numeric_limits<double>::infinity();
};

EvalResult eval_solution(const SolutionEvaluator &ev, cplx t, cplx z, cplx epsilon, EvalMode mode);

struct DiffSample {
    cplx epsilon;
    cplx x_i;
    cplx x_ip1;
    double diff_modulus;
};

struct DifferenceSeries {
    Adjacency verdict;
    std::vector<DiffSample> samples;
};

DifferenceSeries adjacent_difference(const SolutionEvaluator &ev_i, const SolutionEvaluator &ev_ip1, cplx t,
                                     cplx z, std::span<const cplx> eps_grid);
std::string difference_csv(const DifferenceSeries &d);

} // namespace msl
