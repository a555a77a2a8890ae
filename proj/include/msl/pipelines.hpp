#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "msl/config.hpp"

namespace msl {

inline constexpr const char *tool_version = "1.0.0";

struct RunOptions {
    std::filesystem::path out_dir = ".";
    int jobs = 1;
};

struct RunResult {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> messages;
};

// `# generated <UTC time> by multisum-lab <version> config-sha256 <hash>`
std::string provenance_line(const ExperimentConfig &cfg);

RunResult cmd_check_sequence(const ExperimentConfig &cfg, const RunOptions &opt);
RunResult cmd_solve(const ExperimentConfig &cfg, const RunOptions &opt);
RunResult cmd_flatness(const ExperimentConfig &cfg, const RunOptions &opt);
RunResult cmd_rs(const ExperimentConfig &cfg, const RunOptions &opt);
RunResult cmd_singular_directions(const ExperimentConfig &cfg, const RunOptions &opt);
// Every pipeline the config has sections for.
RunResult cmd_demo(const ExperimentConfig &cfg, const RunOptions &opt);

// Sector functions used by cmd_rs: the planted sum in synthetic mode, the
// termwise Laplace sum of the Borel solution in pde mode.
std::vector<ComplexFunction> rs_sector_functions(const ExperimentConfig &cfg);

} // namespace msl
