#include "msl/fps.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "msl/errors.hpp"
#include "msl/quadrature.hpp"

namespace msl {

namespace {

void require_same_var(const TruncatedSeries &a, const TruncatedSeries &b) {
    if (a.var() != b.var())
        throw variable_mismatch(std::string(var_name(a.var())) + " vs " +
                                std::string(var_name(b.var())));
}

double rel_gap(cplx a, cplx b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

} // namespace

std::string_view var_name(Var v) {
    switch (v) {
    case Var::T: return "T";
    case Var::tau: return "tau";
    case Var::z: return "z";
    case Var::eps: return "eps";
    case Var::x: return "x";
    }
    return "?";
}

Var parse_var(std::string_view name) {
    for (Var v : {Var::T, Var::tau, Var::z, Var::eps, Var::x})
        if (var_name(v) == name)
            return v;
    throw variable_mismatch("unknown variable tag `" + std::string(name) + "`");
}

TruncatedSeries::TruncatedSeries(Var var, int order) : var_(var), order_(order) {
    if (order < -1)
        throw std::invalid_argument("series order below -1");
}

TruncatedSeries::TruncatedSeries(Var var, int valuation, std::vector<cplx> coeffs, int order)
    : var_(var), valuation_(valuation), coeffs_(std::move(coeffs)), order_(order) {}

TruncatedSeries TruncatedSeries::from_dense(Var var, std::vector<cplx> dense, int order) {
    if (order < -1)
        throw std::invalid_argument("series order below -1");
    if (static_cast<int>(dense.size()) > order + 1)
        dense.resize(static_cast<std::size_t>(order + 1));
    while (!dense.empty() && dense.back() == cplx{0.0, 0.0})
        dense.pop_back();
    std::size_t v = 0;
    while (v < dense.size() && dense[v] == cplx{0.0, 0.0})
        ++v;
    if (v == dense.size())
        return TruncatedSeries(var, order);
    return TruncatedSeries(var, static_cast<int>(v),
                           std::vector<cplx>(dense.begin() + static_cast<long>(v), dense.end()),
                           order);
}

TruncatedSeries TruncatedSeries::monomial(Var var, int degree, cplx c, int order) {
    if (degree < 0)
        throw std::invalid_argument("negative monomial degree");
    std::vector<cplx> d(static_cast<std::size_t>(degree + 1));
    d.back() = c;
    return from_dense(var, std::move(d), order);
}

cplx TruncatedSeries::coeff(int n) const {
    if (n > order_)
        throw std::out_of_range("coefficient " + std::to_string(n) +
                                " beyond reliable order " + std::to_string(order_));
    if (n < valuation_ || n > degree())
        return {0.0, 0.0};
    return coeffs_[static_cast<std::size_t>(n - valuation_)];
}

std::vector<cplx> TruncatedSeries::dense() const {
    std::vector<cplx> d(static_cast<std::size_t>(std::max(degree() + 1, 0)));
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        d[static_cast<std::size_t>(valuation_) + i] = coeffs_[i];
    return d;
}

cplx TruncatedSeries::operator()(cplx x) const {
    cplx acc{0.0, 0.0};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
        acc = acc * x + *it;
    return valuation_ == 0 ? acc : acc * std::pow(x, valuation_);
}

cplx TruncatedSeries::derivative_at(cplx x) const {
    cplx acc{0.0, 0.0};
    for (int n = degree(); n >= std::max(valuation_, 1); --n)
        acc = acc * x + static_cast<double>(n) * coeffs_[static_cast<std::size_t>(n - valuation_)];
    const int low = std::max(valuation_, 1) - 1;
    return low == 0 ? acc : acc * std::pow(x, low);
}

TruncatedSeries TruncatedSeries::truncated(int order) const {
    if (order >= order_)
        return *this;
    return from_dense(var_, dense(), order);
}

TruncatedSeries TruncatedSeries::with_var(Var v) const {
    TruncatedSeries out = *this;
    out.var_ = v;
    return out;
}

TruncatedSeries add(const TruncatedSeries &a, const TruncatedSeries &b) {
    require_same_var(a, b);
    const int order = std::min(a.order(), b.order());
    const int top = std::min(order, std::max(a.degree(), b.degree()));
    std::vector<cplx> d(static_cast<std::size_t>(std::max(top + 1, 0)));
    for (int n = 0; n <= top; ++n)
        d[static_cast<std::size_t>(n)] = a.coeff(n) + b.coeff(n);
    return TruncatedSeries::from_dense(a.var(), std::move(d), order);
}

TruncatedSeries subtract(const TruncatedSeries &a, const TruncatedSeries &b) {
    return add(a, scale(b, -1.0));
}

TruncatedSeries scale(const TruncatedSeries &a, cplx c) {
    std::vector<cplx> d = a.dense();
    for (auto &x : d)
        x *= c;
    return TruncatedSeries::from_dense(a.var(), std::move(d), a.order());
}

TruncatedSeries cauchy_product(const TruncatedSeries &a, const TruncatedSeries &b) {
    require_same_var(a, b);
    const int order = std::min(a.order() + b.effective_valuation(),
                               b.order() + a.effective_valuation());
    if (a.is_zero() || b.is_zero())
        return TruncatedSeries(a.var(), order);
    const int top = std::min(order, a.degree() + b.degree());
    std::vector<cplx> d(static_cast<std::size_t>(std::max(top + 1, 0)));
    const auto ca = a.coeffs();
    const auto cb = b.coeffs();
    for (std::size_t i = 0; i < ca.size(); ++i) {
        const int ni = a.valuation() + static_cast<int>(i);
        for (std::size_t j = 0; j < cb.size(); ++j) {
            const int n = ni + b.valuation() + static_cast<int>(j);
            if (n > top)
                break;
            d[static_cast<std::size_t>(n)] += ca[i] * cb[j];
        }
    }
    return TruncatedSeries::from_dense(a.var(), std::move(d), order);
}

TruncatedSeries derive(const TruncatedSeries &a) {
    const std::vector<cplx> src = a.dense();
    std::vector<cplx> d(src.size() > 0 ? src.size() - 1 : 0);
    for (std::size_t n = 1; n < src.size(); ++n)
        d[n - 1] = static_cast<double>(n) * src[n];
    return TruncatedSeries::from_dense(a.var(), std::move(d), a.order() - 1);
}

TruncatedSeries irregular(const TruncatedSeries &a, int k) {
    if (k < 1)
        throw std::invalid_argument("irregular operator needs k >= 1");
    const std::vector<cplx> src = a.dense();
    std::vector<cplx> d(src.size() + static_cast<std::size_t>(k));
    for (std::size_t n = 1; n < src.size(); ++n)
        d[n + static_cast<std::size_t>(k)] = static_cast<double>(n) * src[n];
    return TruncatedSeries::from_dense(a.var(), std::move(d), a.order() + k);
}

TruncatedSeries shift(const TruncatedSeries &a, int m) {
    if (m < 0)
        throw std::invalid_argument("negative shift");
    std::vector<cplx> d = a.dense();
    d.insert(d.begin(), static_cast<std::size_t>(m), cplx{0.0, 0.0});
    return TruncatedSeries::from_dense(a.var(), std::move(d), a.order() + m);
}

TruncatedSeries series_arith(const TruncatedSeries &a, const TruncatedSeries &b, SeriesOp op) {
    switch (op.op) {
    case ArithOp::add: return add(a, b);
    case ArithOp::cauchy_product: return cauchy_product(a, b);
    case ArithOp::scale: return scale(a, op.factor);
    case ArithOp::derive: return derive(a);
    case ArithOp::irregular: return irregular(a, op.k);
    }
    return a;
}

TruncatedSeries borel_mk(const TruncatedSeries &f, int k) {
    if (f.var() != Var::T)
        throw variable_mismatch("borel_mk expects a series in T");
    if (k < 1)
        throw std::invalid_argument("borel_mk needs k >= 1");
    if (!f.is_zero() && f.valuation() == 0)
        throw constant_term("m_k-Borel transform is undefined on constants");
    std::vector<cplx> d = f.dense();
    for (std::size_t n = 1; n < d.size(); ++n)
        d[n] /= gamma_fn(static_cast<double>(n) / k);
    return TruncatedSeries::from_dense(Var::tau, std::move(d), f.order());
}

TruncatedSeries laplace_formal(const TruncatedSeries &w, int k) {
    if (w.var() != Var::tau)
        throw variable_mismatch("laplace_formal expects a series in tau");
    if (k < 1)
        throw std::invalid_argument("laplace_formal needs k >= 1");
    if (!w.is_zero() && w.valuation() == 0)
        throw constant_term("m_k-Laplace transform is undefined on constants");
    std::vector<cplx> d = w.dense();
    for (std::size_t n = 1; n < d.size(); ++n)
        d[n] *= gamma_fn(static_cast<double>(n) / k);
    return TruncatedSeries::from_dense(Var::T, std::move(d), w.order());
}

OperatorExpansion expansion_constants(int kappa0, int k) {
    if (kappa0 < 1 || k < 1)
        throw std::invalid_argument("expansion_constants needs kappa0 >= 1 and k >= 1");
    OperatorExpansion out{kappa0, k, std::vector<double>(static_cast<std::size_t>(kappa0)),
                          kappa0 <= 12, {}};

    // Polynomials in n as coefficient vectors, lowest degree first.
    auto solve = [&]<typename Num>(Num) {
        std::vector<Num> rem{Num(1)};
        for (int j = 0; j < kappa0; ++j) {
            std::vector<Num> next(rem.size() + 1, Num(0));
            for (std::size_t i = 0; i < rem.size(); ++i) {
                next[i + 1] += rem[i];
                next[i] -= rem[i] * Num(j);
            }
            rem = std::move(next);
        }
        std::vector<Num> A(static_cast<std::size_t>(kappa0), Num(0));
        for (int p = kappa0; p >= 1; --p) {
            std::vector<Num> basis{Num(1)};
            for (int j = 0; j < p; ++j) {
                std::vector<Num> next(basis.size() + 1, Num(0));
                for (std::size_t i = 0; i < basis.size(); ++i) {
                    next[i + 1] += basis[i];
                    next[i] += basis[i] * Num(j * k);
                }
                basis = std::move(next);
            }
            // basis has leading coefficient 1 at degree p
            const Num a = rem[static_cast<std::size_t>(p)];
            A[static_cast<std::size_t>(p - 1)] = a;
            for (std::size_t i = 0; i < basis.size(); ++i)
                rem[i] -= a * basis[i];
        }
        return A;
    };

    if (out.exact) {
        using boost::multiprecision::cpp_int;
        const auto A = solve(cpp_int(0));
        for (std::size_t i = 0; i < A.size(); ++i) {
            out.A[i] = A[i].convert_to<double>();
            out.A_text.push_back(A[i].str() + "/1");
        }
    } else {
        const auto A = solve(static_cast<long double>(0));
        for (std::size_t i = 0; i < A.size(); ++i)
            out.A[i] = static_cast<double>(A[i]);
    }
    return out;
}

double kernel_weight(int n, int delta, int m, int k) {
    if (m == 0 && n == 0)
        throw constant_term("kernel with m = 0 is not integrable on constants");
    const double nk = static_cast<double>(n) / k;
    return std::pow(static_cast<double>(k), m) *
           gamma_ratio(m + nk, static_cast<double>(delta) / k + m + nk);
}

TruncatedSeries kernel_op(const TruncatedSeries &w, int delta, int m, int k) {
    if (delta < k)
        throw assumption_b_violation("delta = " + std::to_string(delta) + " < k = " +
                                     std::to_string(k));
    if (m < 0)
        throw std::invalid_argument("kernel_op needs m >= 0");
    const int lift = delta + k * m;
    const std::vector<cplx> src = w.dense();
    std::vector<cplx> d(src.size() + static_cast<std::size_t>(lift));
    for (std::size_t n = 0; n < src.size(); ++n)
        if (src[n] != cplx{0.0, 0.0})
            d[n + static_cast<std::size_t>(lift)] =
                src[n] * kernel_weight(static_cast<int>(n), delta, m, k);
    return TruncatedSeries::from_dense(w.var(), std::move(d), w.order() + lift);
}

cplx kernel_integral(const TruncatedSeries &w, int delta, int m, int k, cplx tau,
                     double rel_tol) {
    // σ = τ^k s^k turns dσ/σ into k ds/s and σ^{1/k} into τ s.
    const double a = static_cast<double>(delta) / k;
    const cplx pre = std::pow(tau, delta + k * m) * std::pow(static_cast<double>(k), m + 1) /
                     gamma_fn(a);
    auto f = [&](double s) -> cplx {
        if (s <= 0.0)
            return {0.0, 0.0};
        const double sk = std::pow(s, k);
        const double edge = std::pow(std::max(1.0 - sk, 0.0), a - 1.0);
        return edge * std::pow(sk, m) * w(tau * s) / s;
    };
    return pre * integrate_adaptive(f, 0.0, 1.0, 0.0, rel_tol).value;
}

BorelIdentityReport verify_borel_identities(const TruncatedSeries &f, int k, int m) {
    BorelIdentityReport rep;
    const TruncatedSeries bf = borel_mk(f, k);

    const TruncatedSeries lhs1 = borel_mk(irregular(f, k), k);
    const TruncatedSeries rhs1 = scale(shift(bf, k), static_cast<double>(k));
    for (int n = 0; n <= std::min(lhs1.order(), rhs1.order()); ++n)
        rep.irregular_identity = std::max(rep.irregular_identity, rel_gap(lhs1.coeff(n), rhs1.coeff(n)));

    const TruncatedSeries lhs2 = borel_mk(shift(f, m), k);
    for (int n = bf.valuation(); n <= bf.degree(); ++n) {
        const cplx rhs = bf.coeff(n) * kernel_weight(n, m, 0, k);
        rep.shift_identity_formal = std::max(rep.shift_identity_formal, rel_gap(lhs2.coeff(n + m), rhs));
    }

    if (m >= k) {
        rep.shift_quadrature_checked = true;
        for (double r : {0.3, 0.5}) {
            const cplx tau{r, 0.1 * r};
            rep.shift_identity_quadrature = std::max(
                rep.shift_identity_quadrature, rel_gap(lhs2(tau), kernel_integral(bf, m, 0, k, tau)));
        }
    }
    return rep;
}

void BivariateSeries::validate() const {
    for (const auto &s : slices)
        if (!slices.empty() && s.var() != slices.front().var())
            throw variable_mismatch("bivariate slices disagree on the inner variable");
}

std::string to_json(const TruncatedSeries &s) {
    nlohmann::json j;
    j["var"] = std::string(var_name(s.var()));
    j["valuation"] = s.valuation();
    j["order"] = s.order();
    auto arr = nlohmann::json::array();
    for (const cplx &c : s.coeffs())
        arr.push_back({c.real(), c.imag()});
    j["coeffs"] = arr;
    return j.dump();
}

TruncatedSeries series_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    const Var v = parse_var(j.at("var").get<std::string>());
    const int val = j.at("valuation").get<int>();
    const int order = j.at("order").get<int>();
    std::vector<cplx> d(static_cast<std::size_t>(val), cplx{0.0, 0.0});
    for (const auto &c : j.at("coeffs"))
        d.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
    return TruncatedSeries::from_dense(v, std::move(d), order);
}

} // namespace msl
