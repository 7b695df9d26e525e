/// @file ulocflow.cpp
/// @brief CLI: config-driven experiment runner, kernel check suite, and
///        solution verification.
///
/// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "ulf/parallel.hpp"
#include "ulf/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ulocflow: uniformly-local Navier-Stokes laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string solution_dir;
    int n_override = 64;

    auto* run = app.add_subcommand("run", "execute the configured experiment pipeline");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();

    auto* check = app.add_subcommand("check-kernels", "run the kernel/bound property suites");
    check->add_option("--n", n_override, "grid override (wider budgets below N=64)");

    auto* verify = app.add_subcommand("verify", "check a solution directory against Definition "
                                                "3.1-style conditions");
    verify->add_option("--solution", solution_dir, "trajectory directory")->required();
    verify->add_option("--config", config_path, "experiment config (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const ulf::ExperimentConfig cfg = ulf::ExperimentConfig::load(config_path);
            return ulf::run_experiment(cfg);
        }
        if (check->parsed()) {
            const ulf::CheckReport rep = ulf::check_kernels(n_override);
            for (const auto& row : rep.rows)
                std::printf("%-24s %s  %s\n", row.name.c_str(), row.pass ? "PASS" : "FAIL",
                            row.detail.c_str());
            return rep.all_pass() ? 0 : 3;
        }
        if (verify->parsed()) {
            const ulf::ExperimentConfig cfg = ulf::ExperimentConfig::load(config_path);
            const ulf::VerifyReport rep = ulf::verify_solution(solution_dir, cfg);
            for (const auto& row : rep.conditions)
                std::printf("%-32s %s  %s\n", row.name.c_str(), row.pass ? "PASS" : "FAIL",
                            row.detail.c_str());
            return rep.all_pass() ? 0 : 3;
        }
    } catch (const ulf::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const ulf::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
