#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "acidfront/forward.hpp"
#include "acidfront/inverse.hpp"

namespace acidfront {

/// Flat key = value run configuration; every field defaults to the
/// reference experiment setup. Lists are comma-separated.
struct RunConfig {
    SolverConfig solver;  // tau=0.1, t_final=10, coarse_n=16, eps_tol=1e-5, theta=0.5
    ModelParams model;    // delta1=12.5, rho2=1, d2=4e-5, delta3=1
    InitialCondition profile;

    double delta1_lo = 0.0;
    double delta1_hi = 20.0;
    double delta1_init = 8.0;
    int eval_cap = 100;
    double gtol_rel = 1e-8;

    std::vector<double> true_delta1_list = {4.0, 12.5, 16.0};
    std::vector<double> sigma_list = {0.1, 0.15, 0.2};
    int n_runs = 10;
    std::uint64_t seed = 1;
    std::vector<int> time_workers;  // if nonempty, simulate times the reaction phase

    std::string out_dir = "runs";

    void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& cfg);

/// Builds an estimation problem from the config (data filled in by caller).
EstimationProblem make_problem(const RunConfig& cfg);

}  // namespace acidfront
