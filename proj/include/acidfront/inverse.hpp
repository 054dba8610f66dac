#pragma once

#include <cstdint>
#include <vector>

#include "acidfront/adjoint.hpp"
#include "acidfront/forward.hpp"

namespace acidfront {

struct EstimationProblem {
    std::vector<NodalField> data;  // hat{u}_3 per time level on the coarse grid
    double rho2 = 1.0;
    double d2 = 4e-5;
    double delta3 = 1.0;
    double lo = 0.0;               // admissible interval [lo, hi]
    double hi = 20.0;
    double delta1_init = 8.0;
    SolverConfig config;
    InitialCondition ic;
    int eval_cap = 100;
    double gtol_rel = 1e-8;

    void validate() const;
};

struct IterationRecord {
    double delta1;
    double objective;
    double gradient;
};

struct EstimationResult {
    double delta1_star = 0.0;
    double objective_value = 0.0;
    double gradient_value = 0.0;
    int iterations = 0;
    int evaluations = 0;  // forward solves
    std::vector<IterationRecord> history;
};

/// Bound-constrained scalar minimization of the reduced objective by a
/// safeguarded projected secant-Newton iteration with Armijo backtracking.
/// Each evaluation runs the forward solve, the adjoint solve and the
/// reduced gradient.
EstimationResult minimize(const EstimationProblem& problem);

/// Adds i.i.d. N(0, sigma^2) noise to every nodal value at every level,
/// using the seeded SplitMix64 generator (bit-reproducible).
std::vector<NodalField> add_noise(const std::vector<NodalField>& data, double sigma,
                                  std::uint64_t seed);

/// delta1 = d1 r3 K2 / (d3 r1), rho2 = r2/r1, D2 = DN2/DN3, delta3 = d3/r1.
ModelParams nondimensionalize(double d1, double r1, double r2, double r3, double d3, double K2,
                              double DN2, double DN3);

struct RecoverySummary {
    double true_delta1 = 0.0;
    double sigma = 0.0;
    int n_runs = 0;
    double mean = 0.0;
    double std_dev = 0.0;   // sample standard deviation
    double rel_error = 0.0;
    int failures = 0;
    std::vector<double> estimates;
};

/// Generates data at true_delta1, perturbs per run with derived seeds,
/// minimizes, and reports mean / sample std / relative error. Individual run
/// failures are recorded and excluded.
RecoverySummary recovery_experiment(double true_delta1, double sigma, int n_runs,
                                    std::uint64_t seed, const EstimationProblem& proto);

}  // namespace acidfront
