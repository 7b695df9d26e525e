/// @file config.hpp
/// @brief Experiment configuration: strict JSON schema, validation against
///        the module preconditions, config echo hash.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ulf/lattice.hpp"
#include "ulf/solver.hpp"

namespace ulf {

struct ExperimentConfig {
    // grid
    int N = 64;
    double L = 8.0;
    // data
    DataKind kind = DataKind::Mixed;
    DataParams params;
    std::string split = "generator";
    std::uint64_t seed = 1;
    // solver
    std::vector<double> epsilon_list = {0.5};
    double T_total = 0.0;  ///< 0 = one Picard window, no gluing
    double dt = 0.0;       ///< 0 = T/16 of the first epsilon's window
    double tol = 1e-8;
    int max_iter = 60;
    double c_picard = 1.0 / 64.0;
    // pressure
    std::vector<Vec3> centers;
    std::optional<double> tau;
    double tol_press = 1e-2;
    // diagnostics
    std::vector<double> R_list;
    std::vector<double> t_list;   ///< decay-monitor times (empty = auto)
    std::vector<Vec3> probes;     ///< outward ladder (empty = auto)
    std::vector<double> t0_list;  ///< SLEI restart times (empty = auto)
    int n_test_functions = 2;
    double lei_budget_factor = 5.0;
    // output
    std::filesystem::path out_dir = "out";
    std::vector<std::string> formats = {"csv", "ulf"};

    /// Strict parse: unknown keys anywhere are rejected.
    static ExperimentConfig load(const std::filesystem::path& path);
    static ExperimentConfig from_json_text(const std::string& text);

    /// Re-validates every referenced module precondition; throws
    /// ValidationError with the failing stage name.
    void validate() const;

    /// Canonical JSON echo and its content hash.
    std::string echo_json() const;
    std::uint64_t echo_hash() const;
};

}  // namespace ulf
