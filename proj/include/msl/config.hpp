#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "msl/asymptotics.hpp"
#include "msl/borel_solver.hpp"
#include "msl/eps_expr.hpp"
#include "msl/geometry.hpp"
#include "msl/laplace_eval.hpp"
#include "msl/seqcore.hpp"

namespace msl {

// `key = value` lines under `[section]` headers; `#` starts a comment.
class IniFile {
public:
    struct Entry {
        std::string key;
        std::string value;
        int line;
    };

    static IniFile parse(const std::string &text);

    bool has(const std::string &section) const { return sections_.count(section) > 0; }
    const std::vector<Entry> &entries(const std::string &section) const;
    std::optional<std::string> get(const std::string &section, const std::string &key) const;
    std::vector<std::string> get_all(const std::string &section, const std::string &key) const;
    // Throws config_error naming the section and key.
    std::string require(const std::string &section, const std::string &key) const;

private:
    std::map<std::string, std::vector<Entry>> sections_;
};

struct CoveringConfig {
    GoodCovering covering;
    // Integration ray per sector.
    std::vector<double> gammas;
    std::optional<double> theta;
    std::vector<double> directions;
    Sector t_sector;
    double rho0 = 0.3;
    double cone_margin = 0.1;
    double R_max = 0.0;
};

struct GridConfig {
    std::vector<double> eps_moduli;
    int N_z = 8;
    int N_tau = 0;
    cplx t{0.5, 0.0};
    std::optional<double> T_direction;
    cplx z{0.0, 0.0};
    int p_max = 8;
    std::vector<double> hm_t;
    std::size_t p_max_regularity = 2000;
    std::size_t omega_n_max = 10000;
};

struct RunConfig {
    bool majorant = false;
    double c1 = 1.0;
    double c2 = 1.0;
    int majorant_beta = 0;
    double r_tilde = 0.5;
    double tol = 1e-11;
    double inner_cutoff = 0.0;
    std::string rs_mode = "synthetic";
    bool multisummable = false;
    bool svg = true;
    double eval_tol = 1e-10;
};

struct ExperimentConfig {
    std::string text;
    std::string sha256;
    std::shared_ptr<const SequenceSpec> seq;
    std::optional<ProblemSpec> problem;
    std::optional<CoveringConfig> covering;
    // One per covering sector, or a single one without [covering].
    std::vector<SectorData> sectors;
    std::optional<RationalKernel> kernel;
    // Synthetic two-level data.
    std::vector<EpsExpr> cocycles;
    EpsExpr convergent_part;
    std::map<int, Adjacency> verdicts;
    GridConfig grids;
    RunConfig run;

    std::size_t sector_count() const { return covering ? covering->covering.size() : 1; }
    // ε sample on the bisector of overlap i (or on the positive axis).
    std::vector<cplx> overlap_eps(std::size_t i) const;
    std::vector<cplx> sector_eps(std::size_t i) const;
    SolutionEvaluator evaluator(std::size_t sector) const;
    Adjacency verdict(std::size_t overlap) const;
    // t for overlap i, rotated so that arg(t ε^r) = T_direction when set.
    cplx t_for(double eps_arg) const;
};

std::string sha256_hex(const std::string &data);

ExperimentConfig parse_config(const std::string &text, const std::filesystem::path &base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path &path);

// Runs validate_spec and the geometry checks; throws the first violation.
void validate_config(const ExperimentConfig &cfg);

} // namespace msl
