#include "msl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msl/errors.hpp"

namespace msl {

bool Sector::contains(cplx z) const {
    if (z == cplx{0.0, 0.0})
        return false;
    return std::abs(offset(std::arg(z))) < 0.5 * opening && std::abs(z) < radius;
}

double GoodCovering::overlap_start(std::size_t i) const {
    const Sector &b = next(i);
    return wrap_2pi(b.direction - 0.5 * b.opening);
}

double GoodCovering::overlap_width(std::size_t i) const {
    const Sector &a = sectors[i];
    const Sector &b = next(i);
    const double gap = wrap_2pi(b.direction - a.direction);
    return 0.5 * a.opening + 0.5 * b.opening - gap;
}

GoodCovering build_good_covering(int nu, double opening, double radius, double offset) {
    if (nu < 2)
        throw no_overlap("a good covering needs at least two sectors");
    if (!(opening > 0) || opening >= 2 * pi)
        throw no_overlap("opening must lie in (0, 2*pi)");
    if (!(nu * opening > 2 * pi))
        throw no_overlap("nu * opening = " + std::to_string(nu * opening) + " <= 2*pi");
    if (!(radius > 0))
        throw no_overlap("radius must be positive");
    GoodCovering cov;
    for (int i = 0; i < nu; ++i)
        cov.sectors.push_back({wrap_2pi(offset + 2 * pi * i / nu), opening, radius});
    const CoveringCheck chk = verify_covering(cov);
    if (!chk.covers || !chk.overlaps_nonempty)
        throw no_overlap(chk.problems.empty() ? "grid check failed" : chk.problems.front());
    return cov;
}

CoveringCheck verify_covering(const GoodCovering &cov, int samples) {
    CoveringCheck out;
    const double probe = 0.5 * cov[0].radius;
    for (int s = 0; s < samples; ++s) {
        const double th = 2 * pi * (s + 0.5) / samples;
        const cplx z = std::polar(std::isfinite(probe) ? probe : 1.0, th);
        bool hit = false;
        for (const auto &sec : cov.sectors)
            hit = hit || sec.contains(z);
        if (!hit) {
            out.covers = false;
            out.problems.push_back("direction " + std::to_string(th) + " uncovered");
            break;
        }
    }
    for (std::size_t i = 0; i < cov.size(); ++i) {
        if (!(cov.overlap_width(i) > 0)) {
            out.overlaps_nonempty = false;
            out.problems.push_back("sectors " + std::to_string(i) + " and " +
                                   std::to_string((i + 1) % cov.size()) + " do not overlap");
        }
    }
    return out;
}

std::vector<cplx> SingularSet::poles() const {
    std::vector<cplx> out;
    for (double d : directions)
        out.push_back(std::polar(pole_modulus, d));
    return out;
}

SingularSet singular_directions(int k, int s1, cplx a) {
    if (a == cplx{0.0, 0.0})
        throw invalid_coefficient("a must be nonzero");
    if (k < 2 || s1 < 1)
        throw invalid_coefficient("need k >= 2 and s1 >= 1");
    SingularSet out{k, s1, a, {}, 0.0};
    const int n = k * s1;
    for (int j = 0; j < n; ++j)
        out.directions.push_back(wrap_2pi((pi * (2 * j + 1) + std::arg(a)) / n));
    out.pole_modulus = std::pow(std::abs(a), 1.0 / n) / std::pow(static_cast<double>(k), 1.0 / k);
    return out;
}

AssumptionACheck check_assumption_a(const Sector &sector, double rho0, const SingularSet &sing) {
    double dist = 2 * pi;
    for (double d : sing.directions)
        dist = std::min(dist, std::abs(sector.offset(d)));
    const double gap = dist - 0.5 * sector.opening;
    AssumptionACheck out;
    out.margin = std::max(gap, 0.0);
    out.angular_ok = gap > angle_tol;
    out.radius_ok = rho0 < 0.5 * sing.pole_modulus;
    out.ok = out.angular_ok && out.radius_ok;
    return out;
}

FamilyCheck validate_family(const AssociatedFamily &family, const SingularSet &sing, int k) {
    FamilyCheck out;
    auto fail = [&](std::string msg) {
        out.ok = false;
        out.problems.push_back(std::move(msg));
    };
    const auto &cov = family.covering;
    if (family.directions.size() != cov.size())
        fail("need one direction per covering sector");
    if (!(family.theta > pi / k))
        fail("theta must exceed pi/k");
    if (!family.gammas.empty() && family.gammas.size() != cov.size())
        fail("need one integration ray per covering sector");
    if (!out.ok)
        return out;

    for (std::size_t i = 0; i < cov.size(); ++i)
        for (std::size_t j = 0; j < sing.directions.size(); ++j)
            if (std::abs(wrap_pi(family.directions[i] - sing.directions[j])) <= angle_tol)
                fail("direction d_" + std::to_string(i) + " is singular (j = " +
                     std::to_string(j) + ")");

    // Condition 2 on 32 t-samples × 32 ε-samples per sector, using the
    // branch of ε^r continuous across E_i.
    const double r_e = cov[0].radius;
    const double bound = std::pow(r_e, family.r) * family.t_sector.radius;
    for (std::size_t i = 0; i < cov.size(); ++i) {
        const Sector &e = cov[i];
        bool bad = false;
        for (int ta = 0; ta < 8 && !bad; ++ta)
            for (int tm = 0; tm < 4 && !bad; ++tm)
                for (int ea = 0; ea < 8 && !bad; ++ea)
                    for (int em = 0; em < 4 && !bad; ++em) {
                        const double t_arg = family.t_sector.direction +
                                             family.t_sector.opening * ((ta + 0.5) / 8 - 0.5);
                        const double t_mod = family.t_sector.radius * (tm + 0.5) / 4;
                        const double e_arg = e.direction + e.opening * ((ea + 0.5) / 8 - 0.5);
                        const double e_mod = r_e * (em + 0.5) / 4;
                        const double arg = family.r * e_arg + t_arg;
                        const double mod = std::pow(e_mod, family.r) * t_mod;
                        if (std::abs(wrap_pi(arg - family.directions[i])) >= 0.5 * family.theta ||
                            mod > bound) {
                            bad = true;
                            std::ostringstream msg;
                            msg << "condition 2 fails in sector " << i << " at arg(eps) = " << e_arg
                                << ", arg(t) = " << t_arg;
                            fail(msg.str());
                        }
                    }
    }
    return out;
}

std::string to_string(const Adjacency &adj) {
    return adj.singular_between ? "singular_between(" + std::to_string(adj.j) + ")"
                                : "no_singular_between";
}

Adjacency classify_rays(double gamma_a, double gamma_b, const SingularSet &sing) {
    for (double g : {gamma_a, gamma_b})
        for (std::size_t j = 0; j < sing.directions.size(); ++j)
            if (std::abs(wrap_pi(g - sing.directions[j])) <= angle_tol)
                throw degenerate_ray("ray " + std::to_string(g) +
                                     " lies on singular direction j = " + std::to_string(j));
    double lo = wrap_2pi(gamma_a);
    double hi = wrap_2pi(gamma_b);
    if (lo > hi)
        std::swap(lo, hi);
    double start = lo;
    double width = hi - lo;
    if (width > pi) {
        start = hi;
        width = 2 * pi - width;
    }
    for (std::size_t j = 0; j < sing.directions.size(); ++j) {
        const double u = wrap_2pi(sing.directions[j] - start);
        if (u > angle_tol && u < width - angle_tol)
            return {true, static_cast<int>(j)};
    }
    return {};
}

Adjacency classify_adjacency(const AssociatedFamily &family, const SingularSet &sing, std::size_t i) {
    const std::size_t n = family.covering.size();
    return classify_rays(family.gamma(i % n), family.gamma((i + 1) % n), sing);
}

} // namespace msl
