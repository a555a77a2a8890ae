#include <iostream>

#include "CLI11.hpp"
#include "msl/errors.hpp"
#include "msl/pipelines.hpp"

int main(int argc, char **argv) {
    CLI::App app{"Borel-Laplace and two-level summability experiments"};
    app.set_version_flag("--version", msl::tool_version);
    std::string command;
    std::string config;
    int jobs = 1;
    std::string out = ".";
    app.add_option("command", command, "check-sequence | solve | flatness | rs | singular-directions | demo")
        ->required()
        ->check(CLI::IsMember({"check-sequence", "solve", "flatness", "rs", "singular-directions", "demo"}));
    app.add_option("--config", config, "experiment config file")->required();
    app.add_option("--jobs", jobs, "worker threads over epsilon points")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "output directory");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const msl::ExperimentConfig cfg = msl::load_config(config);
        msl::validate_config(cfg);
        const msl::RunOptions opt{out, jobs};
        msl::RunResult res;
        if (command == "check-sequence")
            res = msl::cmd_check_sequence(cfg, opt);
        else if (command == "solve")
            res = msl::cmd_solve(cfg, opt);
        else if (command == "flatness")
            res = msl::cmd_flatness(cfg, opt);
        else if (command == "rs")
            res = msl::cmd_rs(cfg, opt);
        else if (command == "singular-directions")
            res = msl::cmd_singular_directions(cfg, opt);
        else
            res = msl::cmd_demo(cfg, opt);
        for (const auto &m : res.messages)
            std::cout << m << '\n';
        for (const auto &f : res.files)
            std::cout << "wrote " << f.string() << '\n';
        return 0;
    } catch (const msl::input_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const msl::consistency_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const msl::convergence_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
