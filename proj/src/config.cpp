#include "msl/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "msl/errors.hpp"

namespace msl {

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s, char sep = ',') {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(')
            ++depth;
        if (c == ')')
            --depth;
        if (c == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty())
        out.push_back(trim(cur));
    return out;
}

std::vector<std::string> split_key(const std::string &key) {
    std::vector<std::string> out;
    std::stringstream in(key);
    std::string part;
    while (std::getline(in, part, '.'))
        out.push_back(part);
    return out;
}

int parse_int(const std::string &s, const std::string &what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size())
            throw config_error(what + ": not an integer: `" + s + "`");
        return v;
    } catch (const std::logic_error &) {
        throw config_error(what + ": not an integer: `" + s + "`");
    }
}

bool parse_bool(const std::string &s, const std::string &what) {
    if (s == "true" || s == "yes" || s == "1")
        return true;
    if (s == "false" || s == "no" || s == "0")
        return false;
    throw config_error(what + ": expected true or false, got `" + s + "`");
}

std::vector<double> parse_grid(const std::string &s, const std::string &what) {
    std::istringstream in(s);
    std::string head;
    in >> head;
    std::vector<double> out;
    if (head == "geometric" || head == "linear") {
        std::string a, b;
        int n = 0;
        if (!(in >> a >> b >> n) || n < 1)
            throw config_error(what + ": expected `" + head + " <from> <to> <count>`");
        const double lo = parse_real(a), hi = parse_real(b);
        for (int j = 0; j < n; ++j) {
            const double u = n == 1 ? 0.0 : static_cast<double>(j) / (n - 1);
            out.push_back(head == "geometric" ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u);
        }
        return out;
    }
    for (const auto &item : split_list(s))
        out.push_back(parse_real(item));
    return out;
}

// Config polynomials are exact: reliable far past any working order.
constexpr int exact_order = 4096;

TruncatedSeries parse_poly(const std::string &s, Var var, const std::string &what) {
    std::vector<cplx> dense;
    for (const auto &item : split_list(s)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw config_error(what + ": expected deg:coef pairs, got `" + item + "`");
        const int deg = parse_int(trim(item.substr(0, colon)), what);
        if (deg < 0)
            throw config_error(what + ": negative degree");
        if (static_cast<int>(dense.size()) <= deg)
            dense.resize(static_cast<std::size_t>(deg + 1));
        dense[static_cast<std::size_t>(deg)] += parse_complex(trim(item.substr(colon + 1)));
    }
    return TruncatedSeries::from_dense(var, std::move(dense), exact_order);
}

Adjacency parse_verdict(const std::string &s) {
    if (s == "no_singular_between")
        return {};
    if (s.rfind("singular_between", 0) == 0) {
        Adjacency a{true, -1};
        const auto open = s.find('(');
        if (open != std::string::npos && s.back() == ')')
            a.j = parse_int(s.substr(open + 1, s.size() - open - 2), "verdict");
        return a;
    }
    throw config_error("verdict must be singular_between or no_singular_between, got `" + s + "`");
}

void check_keys(const IniFile &ini, const std::string &section, const std::set<std::string> &allowed,
                const std::set<std::string> &prefixes = {}) {
    for (const auto &e : ini.entries(section)) {
        if (allowed.count(e.key))
            continue;
        const std::string head = e.key.substr(0, e.key.find('.'));
        if (e.key.find('.') != std::string::npos && prefixes.count(head))
            continue;
        throw config_error("line " + std::to_string(e.line) + ": unknown key `" + e.key + "` in [" + section + "]");
    }
}

} // namespace

IniFile IniFile::parse(const std::string &text) {
    IniFile ini;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw.substr(0, raw.find('#')));
        if (s.empty())
            continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw config_error("line " + std::to_string(line) + ": malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            ini.sections_[section];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(line) + ": expected key = value");
        if (section.empty())
            throw config_error("line " + std::to_string(line) + ": key outside any section");
        ini.sections_[section].push_back({trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line});
    }
    return ini;
}

const std::vector<IniFile::Entry> &IniFile::entries(const std::string &section) const {
    static const std::vector<Entry> none;
    const auto it = sections_.find(section);
    return it == sections_.end() ? none : it->second;
}

std::optional<std::string> IniFile::get(const std::string &section, const std::string &key) const {
    std::optional<std::string> out;
    for (const auto &e : entries(section))
        if (e.key == key) {
            if (out)
                throw config_error("line " + std::to_string(e.line) + ": duplicate key `" + key + "`");
            out = e.value;
        }
    return out;
}

std::vector<std::string> IniFile::get_all(const std::string &section, const std::string &key) const {
    std::vector<std::string> out;
    for (const auto &e : entries(section))
        if (e.key == key)
            out.push_back(e.value);
    return out;
}

std::string IniFile::require(const std::string &section, const std::string &key) const {
    if (!has(section))
        throw config_error("missing section [" + section + "]");
    auto v = get(section, key);
    if (!v)
        throw config_error("missing key `" + key + "` in [" + section + "]");
    return *v;
}

std::string sha256_hex(const std::string &data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i)
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return out.str();
}

ExperimentConfig parse_config(const std::string &text, const std::filesystem::path &base_dir) {
    const IniFile ini = IniFile::parse(text);
    ExperimentConfig cfg;
    cfg.text = text;
    cfg.sha256 = sha256_hex(text);
    static const std::set<std::string> known{"sequence", "problem", "covering", "sector_data", "grids", "run"};

    for (const auto &name : known)
        (void)name;
    {
        std::istringstream in(text);
        std::string raw;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            std::string s = trim(raw.substr(0, raw.find('#')));
            if (!s.empty() && s.front() == '[' && !known.count(trim(s.substr(1, s.size() - 2))))
                throw config_error("line " + std::to_string(line) + ": unknown section " + s);
        }
    }

    if (ini.has("sequence")) {
        check_keys(ini, "sequence", {"spec"});
        std::string spec = ini.require("sequence", "spec");
        std::istringstream in(spec);
        std::string kind, path;
        in >> kind;
        if (kind == "table" && (in >> path)) {
            std::filesystem::path p(path);
            if (p.is_relative())
                p = base_dir / p;
            if (!std::filesystem::exists(p))
                throw invalid_sequence("sequence table `" + p.string() + "` does not exist");
            spec = "table " + p.string();
        }
        cfg.seq = std::make_shared<const SequenceSpec>(SequenceSpec::parse(spec));
    }

    if (ini.has("problem")) {
        check_keys(ini, "problem", {"k", "s1", "r1", "S", "a", "sigma", "b_weight", "term"});
        ProblemSpec p;
        p.k = parse_int(ini.require("problem", "k"), "k");
        p.s1 = parse_int(ini.require("problem", "s1"), "s1");
        p.r1 = parse_int(ini.require("problem", "r1"), "r1");
        p.S = parse_int(ini.require("problem", "S"), "S");
        p.a = parse_complex(ini.require("problem", "a"));
        if (auto v = ini.get("problem", "sigma"))
            p.sigma = parse_real(*v);
        if (auto v = ini.get("problem", "b_weight"))
            p.b_weight = parse_real(*v);
        for (const auto &t : ini.get_all("problem", "term")) {
            std::istringstream in(t);
            Term term;
            if (!(in >> term.s >> term.kappa0 >> term.kappa1 >> term.delta))
                throw config_error("term needs `s kappa0 kappa1 delta`, got `" + t + "`");
            p.terms.push_back(term);
        }
        cfg.problem = p;
    }

    if (ini.has("covering")) {
        check_keys(ini, "covering", {"nu", "opening", "radius", "offset", "gammas", "theta", "directions",
                                     "t_direction", "t_opening", "t_radius", "rho0", "cone_margin", "R_max"});
        CoveringConfig c;
        const int nu = parse_int(ini.require("covering", "nu"), "nu");
        const double opening = parse_angle(ini.require("covering", "opening"));
        const double radius = ini.get("covering", "radius") ? parse_real(*ini.get("covering", "radius")) : 1.0;
        const double offset = ini.get("covering", "offset") ? parse_angle(*ini.get("covering", "offset")) : 0.0;
        c.covering = build_good_covering(nu, opening, radius, offset);
        auto angles = [&](const std::string &key) {
            std::vector<double> out;
            if (auto v = ini.get("covering", key))
                for (const auto &item : split_list(*v))
                    out.push_back(parse_angle(item));
            if (!out.empty() && static_cast<int>(out.size()) != nu)
                throw config_error("`" + key + "` needs one angle per sector");
            return out;
        };
        c.gammas = angles("gammas");
        c.directions = angles("directions");
        if (c.gammas.empty())
            c.gammas = c.directions.empty() ? std::vector<double>(static_cast<std::size_t>(nu), 0.0) : c.directions;
        if (c.directions.empty())
            c.directions = c.gammas;
        if (auto v = ini.get("covering", "theta"))
            c.theta = parse_angle(*v);
        c.t_sector.direction = ini.get("covering", "t_direction") ? parse_angle(*ini.get("covering", "t_direction")) : 0.0;
        c.t_sector.opening = ini.get("covering", "t_opening") ? parse_angle(*ini.get("covering", "t_opening")) : 2 * pi;
        c.t_sector.radius = ini.get("covering", "t_radius") ? parse_real(*ini.get("covering", "t_radius"))
                                                              : std::numeric_limits<double>::infinity();
        if (auto v = ini.get("covering", "rho0"))
            c.rho0 = parse_real(*v);
        if (auto v = ini.get("covering", "cone_margin"))
            c.cone_margin = parse_real(*v);
        if (auto v = ini.get("covering", "R_max"))
            c.R_max = parse_real(*v);
        cfg.covering = c;
    }

    const std::size_t nsec = cfg.sector_count();
    cfg.sectors.resize(nsec);
    for (std::size_t i = 0; i < nsec; ++i)
        cfg.sectors[i].index = static_cast<int>(i);
    cfg.cocycles.resize(nsec);
    if (ini.has("sector_data")) {
        check_keys(ini, "sector_data", {"kernel", "convergent"}, {"b", "perturb", "init", "kernel", "cocycle", "verdict"});
        std::map<int, std::pair<TruncatedSeries, EpsExpr>> inits;
        for (const auto &e : ini.entries("sector_data")) {
            const auto parts = split_key(e.key);
            const std::string where = "line " + std::to_string(e.line);
            if (parts[0] == "b" && parts.size() == 3) {
                const int term = parse_int(parts[1], where), beta = parse_int(parts[2], where);
                for (auto &s : cfg.sectors)
                    s.b[{term, beta}] += EpsExpr::parse(e.value, cfg.seq);
            } else if (parts[0] == "perturb" && parts.size() == 4) {
                const int sec = parse_int(parts[1], where);
                if (sec < 0 || sec >= static_cast<int>(nsec))
                    throw config_error(where + ": perturbation for unknown sector " + parts[1]);
                const int term = parse_int(parts[2], where), beta = parse_int(parts[3], where);
                cfg.sectors[static_cast<std::size_t>(sec)].b[{term, beta}] += EpsExpr::parse(e.value, cfg.seq);
            } else if (parts[0] == "init" && (parts.size() == 2 || (parts.size() == 3 && parts[2] == "scale"))) {
                const int j = parse_int(parts[1], where);
                auto &slot = inits.try_emplace(j, TruncatedSeries(Var::tau, 0), EpsExpr::constant({1.0, 0.0})).first->second;
                if (parts.size() == 2)
                    slot.first = parse_poly(e.value, Var::tau, where);
                else
                    slot.second = EpsExpr::parse(e.value, cfg.seq);
            } else if (e.key == "kernel") {
                if (e.value != "rational")
                    throw config_error(where + ": only `kernel = rational` is supported");
                if (!cfg.problem)
                    throw config_error("a rational kernel needs [problem]");
                RationalKernel rk;
                rk.k = cfg.problem->k;
                rk.s1 = cfg.problem->s1;
                rk.a = cfg.problem->a;
                cfg.kernel = rk;
            } else if (e.key == "kernel.numerator" || e.key == "kernel.power") {
                // read below
            } else if (parts[0] == "cocycle" && parts.size() == 2) {
                const int i = parse_int(parts[1], where);
                if (i < 0 || i >= static_cast<int>(nsec))
                    throw config_error(where + ": cocycle for unknown overlap " + parts[1]);
                cfg.cocycles[static_cast<std::size_t>(i)] = EpsExpr::parse(e.value, cfg.seq);
            } else if (e.key == "convergent") {
                cfg.convergent_part = EpsExpr::parse(e.value, cfg.seq);
            } else if (parts[0] == "verdict" && parts.size() == 2) {
                cfg.verdicts[parse_int(parts[1], where)] = parse_verdict(e.value);
            } else {
                throw config_error(where + ": unknown key `" + e.key + "` in [sector_data]");
            }
        }
        if (cfg.kernel) {
            cfg.kernel->numerator = parse_poly(ini.require("sector_data", "kernel.numerator"), Var::tau, "kernel.numerator");
            if (auto v = ini.get("sector_data", "kernel.power"))
                cfg.kernel->power = parse_int(*v, "kernel.power");
            if (cfg.kernel->power < 1)
                throw config_error("kernel.power must be >= 1");
        }
        for (auto &[j, slot] : inits)
            if (j < 0 || (cfg.problem && j >= cfg.problem->S))
                throw config_error("init." + std::to_string(j) + " is outside 0..S-1");
        for (auto &s : cfg.sectors)
            for (auto &[j, slot] : inits) {
                if (static_cast<int>(s.init.size()) <= j)
                    s.init.resize(static_cast<std::size_t>(j + 1));
                s.init[static_cast<std::size_t>(j)] = {slot.first, slot.second};
            }
    }

    if (ini.has("grids")) {
        check_keys(ini, "grids", {"eps", "N_z", "N_tau", "t", "T_direction", "z", "p_max", "hm_t", "p_max_regularity",
                                  "omega_n_max"});
        GridConfig &g = cfg.grids;
        if (auto v = ini.get("grids", "eps"))
            g.eps_moduli = parse_grid(*v, "eps");
        for (double e : g.eps_moduli) {
            if (!(e > 0))
                throw invalid_grid("eps grid contains a non-positive modulus");
            if (e > 1)
                throw invalid_grid("eps grid must stay within |eps| <= 1");
        }
        if (auto v = ini.get("grids", "N_z"))
            g.N_z = parse_int(*v, "N_z");
        if (auto v = ini.get("grids", "N_tau"))
            g.N_tau = parse_int(*v, "N_tau");
        if (auto v = ini.get("grids", "t"))
            g.t = parse_complex(*v);
        if (auto v = ini.get("grids", "T_direction"))
            g.T_direction = parse_angle(*v);
        if (auto v = ini.get("grids", "z"))
            g.z = parse_complex(*v);
        if (auto v = ini.get("grids", "p_max"))
            g.p_max = parse_int(*v, "p_max");
        if (auto v = ini.get("grids", "hm_t"))
            g.hm_t = parse_grid(*v, "hm_t");
        if (auto v = ini.get("grids", "p_max_regularity"))
            g.p_max_regularity = static_cast<std::size_t>(parse_int(*v, "p_max_regularity"));
        if (auto v = ini.get("grids", "omega_n_max"))
            g.omega_n_max = static_cast<std::size_t>(parse_int(*v, "omega_n_max"));
    }
    if (cfg.grids.hm_t.empty())
        cfg.grids.hm_t = parse_grid("geometric 1e-3 1 25", "hm_t");
    if (cfg.grids.N_tau <= 0 && cfg.problem)
        cfg.grids.N_tau = default_n_tau(*cfg.problem, cfg.covering ? cfg.covering->rho0 : 0.3);

    if (ini.has("run")) {
        check_keys(ini, "run", {"majorant", "c1", "c2", "majorant_beta", "r_tilde", "tol", "inner_cutoff", "rs_mode",
                                "multisummable", "svg", "eval_tol"});
        RunConfig &r = cfg.run;
        if (auto v = ini.get("run", "majorant"))
            r.majorant = parse_bool(*v, "majorant");
        if (auto v = ini.get("run", "c1"))
            r.c1 = parse_real(*v);
        if (auto v = ini.get("run", "c2"))
            r.c2 = parse_real(*v);
        if (auto v = ini.get("run", "majorant_beta"))
            r.majorant_beta = parse_int(*v, "majorant_beta");
        if (auto v = ini.get("run", "r_tilde"))
            r.r_tilde = parse_real(*v);
        if (auto v = ini.get("run", "tol"))
            r.tol = parse_real(*v);
        if (auto v = ini.get("run", "inner_cutoff"))
            r.inner_cutoff = parse_real(*v);
        if (auto v = ini.get("run", "rs_mode")) {
            if (*v != "synthetic" && *v != "pde")
                throw config_error("rs_mode must be synthetic or pde");
            r.rs_mode = *v;
        }
        if (auto v = ini.get("run", "multisummable"))
            r.multisummable = parse_bool(*v, "multisummable");
        if (auto v = ini.get("run", "svg"))
            r.svg = parse_bool(*v, "svg");
        if (auto v = ini.get("run", "eval_tol"))
            r.eval_tol = parse_real(*v);
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw config_error("cannot read config `" + path.string() + "`");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

std::vector<cplx> ExperimentConfig::overlap_eps(std::size_t i) const {
    const double dir = covering ? covering->covering.overlap_mid(i) : 0.0;
    std::vector<cplx> out;
    for (double m : grids.eps_moduli)
        out.push_back(std::polar(m, dir));
    return out;
}

std::vector<cplx> ExperimentConfig::sector_eps(std::size_t i) const {
    const double dir = covering ? covering->covering[i].direction : 0.0;
    std::vector<cplx> out;
    for (double m : grids.eps_moduli)
        out.push_back(std::polar(m, dir));
    return out;
}

cplx ExperimentConfig::t_for(double eps_arg) const {
    if (!grids.T_direction || !problem)
        return grids.t;
    return std::polar(std::abs(grids.t), *grids.T_direction - problem->r() * eps_arg);
}

SolutionEvaluator ExperimentConfig::evaluator(std::size_t sector) const {
    if (!problem)
        throw config_error("evaluation needs [problem]");
    SolutionEvaluator ev;
    ev.spec = *problem;
    ev.data = sectors.at(sector);
    ev.N_z = grids.N_z;
    ev.N_tau = grids.N_tau;
    ev.kernel = kernel;
    ev.tol = run.eval_tol;
    if (covering) {
        ev.gamma = covering->gammas.at(sector);
        ev.quad.cone_margin = covering->cone_margin;
        if (covering->t_sector.opening < 2 * pi)
            ev.t_sector = covering->t_sector;
    }
    ev.quad.gamma = ev.gamma;
    const double pm = problem->pole_modulus();
    double R = covering && covering->R_max > 0 ? covering->R_max : 0.0;
    if (R <= 0)
        R = kernel ? std::max(12.0, 4 * pm) : 0.8 * pm;
    ev.quad.R_max = R;
    return ev;
}

Adjacency ExperimentConfig::verdict(std::size_t overlap) const {
    if (auto it = verdicts.find(static_cast<int>(overlap)); it != verdicts.end())
        return it->second;
    if (!covering || !problem)
        return {};
    const std::size_t n = covering->covering.size();
    return classify_rays(covering->gammas[overlap], covering->gammas[(overlap + 1) % n],
                         singular_directions(problem->k, problem->s1, problem->a));
}

void validate_config(const ExperimentConfig &cfg) {
    if (cfg.problem) {
        std::vector<std::string> violations;
        auto note = [&](const SpecReport &rep) {
            for (const auto &v : rep.violations)
                if (std::find(violations.begin(), violations.end(), v) == violations.end())
                    violations.push_back(v);
        };
        if (cfg.kernel)
            note(validate_spec(*cfg.problem));
        else
            for (const auto &s : cfg.sectors)
                note(validate_spec(*cfg.problem, s));
        if (!violations.empty()) {
            std::string msg = "problem violates the structural assumptions:";
            for (const auto &v : violations)
                msg += "\n  - " + v;
            throw assumption_b_violation(msg);
        }
    }
    if (cfg.covering && cfg.problem) {
        const SingularSet sing = singular_directions(cfg.problem->k, cfg.problem->s1, cfg.problem->a);
        for (std::size_t i = 0; i < cfg.covering->covering.size(); ++i)
            (void)cfg.verdict(i);
        if (cfg.covering->theta) {
            AssociatedFamily fam;
            fam.covering = cfg.covering->covering;
            fam.directions = cfg.covering->directions;
            fam.theta = *cfg.covering->theta;
            fam.r = cfg.problem->r();
            fam.t_sector = cfg.covering->t_sector;
            fam.rho0 = cfg.covering->rho0;
            fam.gammas = cfg.covering->gammas;
            const FamilyCheck chk = validate_family(fam, sing, cfg.problem->k);
            if (!chk.ok) {
                std::string msg = "associated family check failed:";
                for (const auto &p : chk.problems)
                    msg += "\n  - " + p;
                throw geometry_error(msg);
            }
        }
        if (cfg.covering->rho0 >= sing.pole_modulus)
            throw geometry_error("rho0 must stay below the pole modulus");
    }
}

} // namespace msl
