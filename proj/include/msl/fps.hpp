#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msl/special.hpp"

namespace msl {

enum class Var { T, tau, z, eps, x };

std::string_view var_name(Var v);
Var parse_var(std::string_view name);

// Finite-order power series in one formal variable. `order` is the reliable
// order: coefficients of degree > order are unknown, not zero.
class TruncatedSeries {
public:
    // The zero series, known to vanish through `order`.
    TruncatedSeries(Var var, int order);
    // dense[n] is the coefficient of degree n; entries past `order` are dropped.
    static TruncatedSeries from_dense(Var var, std::vector<cplx> dense, int order);
    static TruncatedSeries monomial(Var var, int degree, cplx c, int order);

    Var var() const { return var_; }
    int valuation() const { return valuation_; }
    int order() const { return order_; }
    bool is_zero() const { return coeffs_.empty(); }
    // Coefficients starting at the valuation.
    std::span<const cplx> coeffs() const { return coeffs_; }
    // Highest stored degree; valuation − 1 for the zero series.
    int degree() const { return valuation_ + static_cast<int>(coeffs_.size()) - 1; }
    // Valuation used for reliability bookkeeping (order + 1 for the zero series).
    int effective_valuation() const { return is_zero() ? order_ + 1 : valuation_; }

    // Coefficient of x^n; throws past the reliable order.
    cplx coeff(int n) const;
    std::vector<cplx> dense() const;

    // Evaluation of the known polynomial part.
    cplx operator()(cplx x) const;
    cplx derivative_at(cplx x) const;

    TruncatedSeries truncated(int order) const;
    TruncatedSeries with_var(Var v) const;

    friend bool operator==(const TruncatedSeries &, const TruncatedSeries &) = default;

private:
    TruncatedSeries(Var var, int valuation, std::vector<cplx> coeffs, int order);

    Var var_;
    int valuation_ = 0;
    std::vector<cplx> coeffs_;
    int order_ = 0;
};

TruncatedSeries add(const TruncatedSeries &a, const TruncatedSeries &b);
TruncatedSeries subtract(const TruncatedSeries &a, const TruncatedSeries &b);
TruncatedSeries scale(const TruncatedSeries &a, cplx c);
TruncatedSeries cauchy_product(const TruncatedSeries &a, const TruncatedSeries &b);
TruncatedSeries derive(const TruncatedSeries &a);
// x^{k+1} d/dx: x^n ↦ n x^{n+k}.
TruncatedSeries irregular(const TruncatedSeries &a, int k);
// Multiplication by x^m.
TruncatedSeries shift(const TruncatedSeries &a, int m);

inline TruncatedSeries operator+(const TruncatedSeries &a, const TruncatedSeries &b) { return add(a, b); }
inline TruncatedSeries operator-(const TruncatedSeries &a, const TruncatedSeries &b) { return subtract(a, b); }
inline TruncatedSeries operator*(const TruncatedSeries &a, const TruncatedSeries &b) { return cauchy_product(a, b); }
inline TruncatedSeries operator*(cplx c, const TruncatedSeries &a) { return scale(a, c); }

enum class ArithOp { add, cauchy_product, scale, derive, irregular };

struct SeriesOp {
    ArithOp op;
    cplx factor{1.0, 0.0};
    int k = 1;
};

// Dispatcher over the operations above; `b` is ignored by unary ones.
TruncatedSeries series_arith(const TruncatedSeries &a, const TruncatedSeries &b, SeriesOp op);

// a_n ↦ a_n / Γ(n/k), from T to τ.
TruncatedSeries borel_mk(const TruncatedSeries &f, int k);
// a_n ↦ a_n · Γ(n/k), from τ to T.
TruncatedSeries laplace_formal(const TruncatedSeries &w, int k);

struct OperatorExpansion {
    int kappa0;
    int k;
    // A[p − 1] multiplies ∏_{j<p}(n + jk); A[kappa0 − 1] = 1.
    std::vector<double> A;
    bool exact;
    // Exact values as "p/q" strings when `exact`.
    std::vector<std::string> A_text;

    double operator[](int p) const { return A.at(static_cast<std::size_t>(p - 1)); }
};

OperatorExpansion expansion_constants(int kappa0, int k);

// Monomial weight k^m Γ(m + n/k)/Γ(δ/k + m + n/k) of the Beta-kernel operator.
double kernel_weight(int n, int delta, int m, int k);
// τ^n ↦ kernel_weight · τ^{n+δ+km}, coefficient-wise.
TruncatedSeries kernel_op(const TruncatedSeries &w, int delta, int m, int k);
// The defining integral of kernel_op evaluated by quadrature at one point.
cplx kernel_integral(const TruncatedSeries &w, int delta, int m, int k, cplx tau,
                     double rel_tol = 1e-13);

struct BorelIdentityReport {
    double irregular_identity = 0.0;
    double shift_identity_formal = 0.0;
    // Quadrature comparison, only for m ≥ k.
    bool shift_quadrature_checked = false;
    double shift_identity_quadrature = 0.0;
};

BorelIdentityReport verify_borel_identities(const TruncatedSeries &f, int k, int m);

// Σ_β slices[β] z^β/β!; every slice shares one inner variable and order.
struct BivariateSeries {
    Var outer = Var::z;
    std::vector<TruncatedSeries> slices;

    int outer_order() const { return static_cast<int>(slices.size()) - 1; }
    // Throws variable_mismatch when slices disagree.
    void validate() const;
};

std::string to_json(const TruncatedSeries &s);
TruncatedSeries series_from_json(std::string_view text);

} // namespace msl
