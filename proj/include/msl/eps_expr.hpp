#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "msl/seqcore.hpp"
#include "msl/special.hpp"

namespace msl {

// coeff · ε^power · [h_M(hm_scale·|ε|)] · [exp(−flat_m·(ε e^{−i·flat_dir})^{−flat_alpha})]
struct EpsAtom {
    cplx coeff{1.0, 0.0};
    double power = 0.0;
    double hm_scale = 0.0;
    double flat_m = 0.0;
    double flat_alpha = 1.0;
    double flat_dir = 0.0;
};

// Closed-form function of the perturbation parameter: a sum of atoms.
// Text form: atoms joined by `+`, each a `*`-product of factors from
//   <real> | (<re>, <im>) | eps | eps^<p> | hm(<K>) | flat(<M>, <alpha>[, <dir>])
// where flat(...) is flat along the direction <dir> (radians, default 0).
// `xi` is accepted as a synonym of `eps`.
class EpsExpr {
public:
    EpsExpr() = default;
    static EpsExpr constant(cplx c);
    static EpsExpr parse(std::string_view text, std::shared_ptr<const SequenceSpec> seq = nullptr);

    cplx operator()(cplx eps) const;
    bool is_zero() const { return atoms_.empty(); }
    bool uses_hm() const;
    const std::vector<EpsAtom> &atoms() const { return atoms_; }

    EpsExpr &operator+=(const EpsExpr &other);
    EpsExpr scaled(cplx c) const;
    std::string describe() const;

private:
    std::vector<EpsAtom> atoms_;
    std::shared_ptr<const SequenceSpec> seq_;
};

// Parses a real or rational `p/q` literal.
double parse_real(std::string_view text);
// Radians, optionally as a multiple of pi: `pi`, `1/2*pi`, `-0.25 pi`.
double parse_angle(std::string_view text);
// Parses `(re, im)`, a real, or a rational.
cplx parse_complex(std::string_view text);

} // namespace msl
