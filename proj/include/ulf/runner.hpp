/// @file runner.hpp
/// @brief Pipeline orchestration behind the CLI verbs: run, check-kernels,
///        verify.

#pragma once

#include "ulf/config.hpp"

namespace ulf {

struct CheckRow {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CheckReport {
    std::vector<CheckRow> rows;
    bool all_pass() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return true;
    }
};

/// Consolidated kernel/bound property suites at a built-in grid. Budgets
/// widen proportionally to h/0.25 on coarse override grids.
CheckReport check_kernels(int N = 64);

namespace detail {
/// Test hook: mutate flips the sign of the Oseen projector off-diagonal in
/// the dual-path comparison (negative control for the suite).
CheckReport check_kernels_impl(const Grid& g, bool mutate_oseen_sign);
}  // namespace detail

/// Full experiment pipeline: generate data, eps-family solves, glue,
/// pressure reports, diagnostics, manifest. Returns the process exit code
/// (0 ok, 2 validation error, 3 numerical failure); partial outputs are
/// retained with a FAILED marker in the manifest.
int run_experiment(const ExperimentConfig& cfg);

struct VerifyReport {
    std::vector<CheckRow> conditions;  ///< (i) .. (v)
    bool all_pass() const {
        for (const auto& r : conditions)
            if (!r.pass) return false;
        return true;
    }
};

/// Definition-of-local-energy-solution checks on a solution directory in
/// the documented formats. Malformed inputs throw ValidationError.
VerifyReport verify_solution(const std::filesystem::path& solution_dir,
                             const ExperimentConfig& cfg);

}  // namespace ulf
