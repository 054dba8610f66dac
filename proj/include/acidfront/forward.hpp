#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "acidfront/fem.hpp"
#include "acidfront/mesh.hpp"

namespace acidfront {

/// The four dimensionless model parameters.
struct ModelParams {
    double delta1 = 12.5;  // acid destruction of host tissue
    double rho2 = 1.0;     // tumor growth ratio
    double d2 = 4e-5;      // diffusivity ratio
    double delta3 = 1.0;   // acid kinetics ratio
};

/// Nodal (u1, u2, u3) triplet on one mesh at one time level.
struct StateField {
    NodalField u1, u2, u3;
    double time = 0.0;
};

/// Forward solution recorded on the coarse mesh at t0..tN, uniform step tau.
struct Trajectory {
    Mesh coarse_mesh;
    std::vector<double> times;
    std::vector<StateField> states;
    std::vector<int> refines_per_step;      // per accepted time step
    std::vector<double> eta_per_step;       // accepted eta(Omega) per step
    int warnings = 0;                       // steps accepted at the refine cap

    int num_levels() const { return static_cast<int>(states.size()); }
    double tau() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

struct ErrorIndicators {
    std::vector<double> per_element;  // eta(T)
    std::vector<double> per_edge;     // eta(S), interior and boundary edges
    double global = 0.0;              // eta(Omega)
};

struct SolverConfig {
    double tau = 0.1;
    double t_final = 10.0;
    double eps_tol = 1e-5;
    double theta = 0.5;
    double reaction_abs_tol = 1e-8;
    double reaction_rel_tol = 1e-6;
    int max_refines_per_step = 10;
    double cg_tol = 1e-10;
    int coarse_n = 16;
    int workers = 0;  // <= 0: serial in library use, auto-detected by the CLI
    // Clamp negative nodal values after each accepted step. Under-resolved
    // fronts can undershoot in the diffusion solve and a negative u2 makes
    // the logistic reaction blow down in finite time; the cutoff makes the
    // forward map nonsmooth, so gradient-based estimation on resolved
    // configurations may turn it off.
    bool positivity_cutoff = true;

    void validate() const;
    int num_steps() const;
};

/// Initial profile: either the canonical gaussian seed or nodal fields read
/// from files.
struct InitialCondition {
    std::string kind = "gaussian-seed";  // or "file"
    double center_x = 0.5;
    double center_y = 0.5;
    double width_sq = 0.01;
    std::string file_u1, file_u2, file_u3;  // for kind == "file"
};

/// Evaluates the initial profile on the mesh: u2 = exp(-|x-c|^2/w^2),
/// u1 = 1 - u2, u3 = u2 for the gaussian seed.
StateField initial_condition(const Mesh& mesh, const InitialCondition& ic);

/// Node-wise exact reaction flow over [t, t+dt] via adaptive RK45:
///   du1/dt = u1(1-u1) - delta1 u1 u3
///   du2/dt = rho2 u2 (1-u2)
///   du3/dt = delta3 (u2 - u3)
StateField reaction_step(const Mesh& mesh, const StateField& state, const ModelParams& params,
                         double dt, double abs_tol, double rel_tol, int workers = 1);

/// Semi-implicit diffusion step: u2 with coefficient D2(1-u1) frozen at the
/// post-reaction u1, u3 with unit coefficient, u1 unchanged.
StateField diffusion_step(const Mesh& mesh, const StateField& state, const ModelParams& params,
                          double tau, double cg_tol);

/// Residual a posteriori estimator: element residuals of all three equations
/// plus diffusive flux jumps of u2 and u3 across interior edges and the
/// Neumann mismatch on boundary edges.
ErrorIndicators estimate_error(const Mesh& mesh, const StateField& state_new,
                               const StateField& state_old, double tau,
                               const ModelParams& params, int workers = 1);

/// Per-step diagnostics hook (time level, refine count, eta).
using StepCallback = std::function<void(int level, int refines, double eta)>;

/// Full forward solve: reaction + diffusion per step, estimate, bulk-mark and
/// RGB-refine the working mesh until eta(Omega) < eps_tol or the refine cap,
/// record accepted states on the coarse mesh.
Trajectory solve_direct(const ModelParams& params, const SolverConfig& config,
                        const InitialCondition& ic, const StepCallback& on_step = {});

}  // namespace acidfront
