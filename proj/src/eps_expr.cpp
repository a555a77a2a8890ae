#include "msl/eps_expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "msl/errors.hpp"

namespace msl {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// Split on `sep` outside parentheses.
std::vector<std::string_view> split_top(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(')
            ++depth;
        else if (s[i] == ')')
            --depth;
        else if (s[i] == sep && depth == 0) {
            parts.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    parts.push_back(trim(s.substr(start)));
    return parts;
}

std::string_view call_args(std::string_view factor, std::string_view name) {
    if (factor.size() < name.size() + 2 || factor.substr(0, name.size()) != name ||
        factor[name.size()] != '(' || factor.back() != ')')
        return {};
    return factor.substr(name.size() + 1, factor.size() - name.size() - 2);
}

} // namespace

double parse_real(std::string_view text) {
    text = trim(text);
    const auto slash = text.find('/');
    try {
        if (slash != std::string_view::npos) {
            const double num = std::stod(std::string(text.substr(0, slash)));
            const double den = std::stod(std::string(text.substr(slash + 1)));
            if (den == 0.0)
                throw config_error("zero denominator in `" + std::string(text) + "`");
            return num / den;
        }
        std::size_t used = 0;
        const double v = std::stod(std::string(text), &used);
        if (used != text.size())
            throw config_error("trailing characters in number `" + std::string(text) + "`");
        return v;
    } catch (const std::invalid_argument &) {
        throw config_error("not a number: `" + std::string(text) + "`");
    } catch (const std::out_of_range &) {
        throw config_error("number out of range: `" + std::string(text) + "`");
    }
}

double parse_angle(std::string_view text) {
    text = trim(text);
    if (text.ends_with("pi")) {
        std::string_view head = trim(text.substr(0, text.size() - 2));
        if (head.ends_with('*'))
            head = trim(head.substr(0, head.size() - 1));
        if (head.empty())
            return pi;
        if (head == "-")
            return -pi;
        return parse_real(head) * pi;
    }
    return parse_real(text);
}

cplx parse_complex(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '(') {
        if (text.back() != ')')
            throw config_error("unbalanced complex literal `" + std::string(text) + "`");
        const auto parts = split_top(text.substr(1, text.size() - 2), ',');
        if (parts.size() != 2)
            throw config_error("complex literal needs (re, im): `" + std::string(text) + "`");
        return {parse_real(parts[0]), parse_real(parts[1])};
    }
    return {parse_real(text), 0.0};
}

EpsExpr EpsExpr::constant(cplx c) {
    EpsExpr e;
    if (c != cplx{0.0, 0.0})
        e.atoms_.push_back({c});
    return e;
}

EpsExpr EpsExpr::parse(std::string_view text, std::shared_ptr<const SequenceSpec> seq) {
    EpsExpr out;
    out.seq_ = std::move(seq);
    text = trim(text);
    if (text.empty() || text == "0")
        return out;
    for (std::string_view term : split_top(text, '+')) {
        if (term.empty())
            throw config_error("empty term in `" + std::string(text) + "`");
        EpsAtom atom;
        for (std::string_view f : split_top(term, '*')) {
            if (f == "eps" || f == "xi") {
                atom.power += 1.0;
            } else if (f.starts_with("eps^") || f.starts_with("xi^")) {
                atom.power += parse_real(f.substr(f.find('^') + 1));
            } else if (auto a = call_args(f, "hm"); !a.empty()) {
                if (!out.seq_)
                    throw config_error("hm(...) needs a [sequence] section");
                atom.hm_scale = parse_real(a);
            } else if (auto a = call_args(f, "flat"); !a.empty()) {
                const auto parts = split_top(a, ',');
                if (parts.size() != 2 && parts.size() != 3)
                    throw config_error("flat(M, alpha[, dir]) takes two or three arguments");
                atom.flat_m = parse_real(parts[0]);
                atom.flat_alpha = parse_real(parts[1]);
                if (parts.size() == 3)
                    atom.flat_dir = parse_angle(parts[2]);
            } else {
                atom.coeff *= parse_complex(f);
            }
        }
        out.atoms_.push_back(atom);
    }
    return out;
}

cplx EpsExpr::operator()(cplx eps) const {
    cplx sum{0.0, 0.0};
    for (const auto &a : atoms_) {
        cplx v = a.coeff;
        if (a.power != 0.0)
            v *= cpow(eps, a.power);
        if (a.hm_scale > 0.0)
            v *= h_m(*seq_, a.hm_scale * std::abs(eps));
        if (a.flat_m != 0.0)
            v *= std::exp(-a.flat_m * cpow(eps * std::polar(1.0, -a.flat_dir), -a.flat_alpha));
        sum += v;
    }
    return sum;
}

bool EpsExpr::uses_hm() const {
    for (const auto &a : atoms_)
        if (a.hm_scale > 0.0)
            return true;
    return false;
}

EpsExpr &EpsExpr::operator+=(const EpsExpr &other) {
    atoms_.insert(atoms_.end(), other.atoms_.begin(), other.atoms_.end());
    if (!seq_)
        seq_ = other.seq_;
    return *this;
}

EpsExpr EpsExpr::scaled(cplx c) const {
    EpsExpr out = *this;
    for (auto &a : out.atoms_)
        a.coeff *= c;
    return out;
}

std::string EpsExpr::describe() const {
    if (atoms_.empty())
        return "0";
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const auto &a = atoms_[i];
        if (i)
            out << " + ";
        out << '(' << a.coeff.real() << ", " << a.coeff.imag() << ')';
        if (a.power != 0.0)
            out << "*eps^" << a.power;
        if (a.hm_scale > 0.0)
            out << "*hm(" << a.hm_scale << ')';
        if (a.flat_m != 0.0)
            out << "*flat(" << a.flat_m << ", " << a.flat_alpha << ", " << a.flat_dir << ')';
    }
    return out.str();
}

} // namespace msl
