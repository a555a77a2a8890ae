#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "msl/special.hpp"

namespace msl {

inline constexpr double angle_tol = 1e-12;

struct Sector {
    double direction = 0.0;
    double opening = 0.0;
    double radius = std::numeric_limits<double>::infinity();

    bool contains(cplx z) const;
    // Signed angular offset of arg(z) from the bisector, in (−π, π].
    double offset(double arg) const { return wrap_pi(arg - direction); }
};

struct GoodCovering {
    std::vector<Sector> sectors;

    std::size_t size() const { return sectors.size(); }
    const Sector &operator[](std::size_t i) const { return sectors[i]; }
    const Sector &next(std::size_t i) const { return sectors[(i + 1) % sectors.size()]; }
    // Angular interval of E_i ∩ E_{i+1}: start and width, the start taken
    // counter-clockwise from the bisector of E_i.
    double overlap_start(std::size_t i) const;
    double overlap_width(std::size_t i) const;
    double overlap_mid(std::size_t i) const { return wrap_2pi(overlap_start(i) + 0.5 * overlap_width(i)); }
};

struct CoveringCheck {
    bool overlaps_nonempty = true;
    bool covers = true;
    std::vector<std::string> problems;
};

GoodCovering build_good_covering(int nu, double opening, double radius, double offset = 0.0);
// Grid check of the good-covering axioms on `samples` equally spaced angles.
CoveringCheck verify_covering(const GoodCovering &cov, int samples = 4096);

struct SingularSet {
    int k = 0;
    int s1 = 0;
    cplx a;
    std::vector<double> directions;
    double pole_modulus = 0.0;

    std::vector<cplx> poles() const;
};

SingularSet singular_directions(int k, int s1, cplx a);

struct AssumptionACheck {
    bool ok;
    double margin;
    bool angular_ok;
    bool radius_ok;
};

AssumptionACheck check_assumption_a(const Sector &sector, double rho0, const SingularSet &sing);

struct AssociatedFamily {
    GoodCovering covering;
    std::vector<double> directions;
    double theta = 0.0;
    double r = 1.0;
    Sector t_sector;
    double rho0 = 0.0;
    // Integration rays γ_i; defaults to `directions` when empty.
    std::vector<double> gammas;

    double gamma(std::size_t i) const { return gammas.empty() ? directions.at(i) : gammas.at(i); }
};

struct FamilyCheck {
    bool ok = true;
    std::vector<std::string> problems;
};

FamilyCheck validate_family(const AssociatedFamily &family, const SingularSet &sing, int k);

struct Adjacency {
    bool singular_between = false;
    int j = -1;

    friend bool operator==(const Adjacency &, const Adjacency &) = default;
};

std::string to_string(const Adjacency &adj);

// Singular direction strictly inside the shorter arc between two rays.
Adjacency classify_rays(double gamma_a, double gamma_b, const SingularSet &sing);
Adjacency classify_adjacency(const AssociatedFamily &family, const SingularSet &sing, std::size_t i);

} // namespace msl
