#include "acidfront/forward.hpp"

#include <cmath>
#include <stdexcept>

#include "acidfront/io.hpp"
#include "acidfront/ode.hpp"
#include "acidfront/parallel.hpp"

namespace acidfront {

void SolverConfig::validate() const {
    if (tau <= 0.0) throw std::invalid_argument("config: tau must be positive");
    if (eps_tol <= 0.0) throw std::invalid_argument("config: eps_tol must be positive");
    if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("config: theta outside [0,1]");
    if (coarse_n < 1) throw std::invalid_argument("config: coarse_n must be positive");
    double steps = t_final / tau;
    if (std::abs(steps - std::round(steps)) > 1e-9 || steps < 0.5)
        throw std::invalid_argument("config: t_final must be a positive multiple of tau");
}

int SolverConfig::num_steps() const { return static_cast<int>(std::round(t_final / tau)); }

StateField initial_condition(const Mesh& mesh, const InitialCondition& ic) {
    const int n = mesh.num_nodes();
    StateField s;
    s.time = 0.0;
    if (ic.kind == "gaussian-seed") {
        s.u1.resize(n);
        s.u2.resize(n);
        s.u3.resize(n);
        for (int v = 0; v < n; ++v) {
            double dx = mesh.nodes[v].x - ic.center_x;
            double dy = mesh.nodes[v].y - ic.center_y;
            double seed = std::exp(-(dx * dx + dy * dy) / ic.width_sq);
            s.u2[v] = seed;
            s.u1[v] = 1.0 - seed;
            s.u3[v] = seed;
        }
    } else if (ic.kind == "uniform") {
        // constants packed into (center_x, center_y, width_sq) slots
        s.u1 = NodalField::Constant(n, ic.center_x);
        s.u2 = NodalField::Constant(n, ic.center_y);
        s.u3 = NodalField::Constant(n, ic.width_sq);
    } else if (ic.kind == "file") {
        s.u1 = read_field(ic.file_u1);
        s.u2 = read_field(ic.file_u2);
        s.u3 = read_field(ic.file_u3);
        if (s.u1.size() != n || s.u2.size() != n || s.u3.size() != n)
            throw std::runtime_error("initial_condition: file node count does not match mesh");
    } else {
        throw std::invalid_argument("initial_condition: unknown profile '" + ic.kind + "'");
    }
    return s;
}

StateField reaction_step(const Mesh& mesh, const StateField& state, const ModelParams& params,
                         double dt, double abs_tol, double rel_tol, int workers) {
    const int n = mesh.num_nodes();
    if (state.u1.size() != n)
        throw std::invalid_argument("reaction_step: state does not live on mesh");
    StateField out = state;
    out.time = state.time + dt;
    const double d1 = params.delta1, r2 = params.rho2, d3 = params.delta3;
    parallel_for(n, workers, [&](int v) {
        std::array<double, 3> y{state.u1[v], state.u2[v], state.u3[v]};
        auto rhs = [d1, r2, d3](const std::array<double, 3>& u) {
            return std::array<double, 3>{u[0] * (1.0 - u[0]) - d1 * u[0] * u[2],
                                         r2 * u[1] * (1.0 - u[1]),
                                         d3 * (u[1] - u[2])};
        };
        try {
            y = rk45_integrate<3>(y, state.time, state.time + dt, rhs, abs_tol, rel_tol);
        } catch (const std::exception& e) {
            throw std::runtime_error("reaction_step: node " + std::to_string(v) + ": " + e.what());
        }
        out.u1[v] = y[0];
        out.u2[v] = y[1];
        out.u3[v] = y[2];
    });
    return out;
}

StateField diffusion_step(const Mesh& mesh, const StateField& state, const ModelParams& params,
                          double tau, double cg_tol) {
    const int n = mesh.num_nodes();
    if (state.u1.size() != n)
        throw std::invalid_argument("diffusion_step: state does not live on mesh");
    StateField out = state;
    SparseMatrix M = assemble_mass(mesh);

    NodalField coeff = (params.d2 * (NodalField::Ones(n) - state.u1)).cwiseMax(0.0);
    SparseMatrix K2 = assemble_stiffness(mesh, coeff);
    out.u2 = solve_spd(M + tau * K2, M * state.u2, cg_tol);

    SparseMatrix K3 = assemble_stiffness_unit(mesh);
    out.u3 = solve_spd(M + tau * K3, M * state.u3, cg_tol);
    return out;
}

ErrorIndicators estimate_error(const Mesh& mesh, const StateField& state_new,
                               const StateField& state_old, double tau,
                               const ModelParams& params, int workers) {
    const int nt = mesh.num_triangles();
    const int ne = mesh.num_edges();

    // elementwise constant gradients and diffusion coefficient of the new state
    std::vector<Vec2> grad_u1(nt), grad_u2(nt), grad_u3(nt);
    std::vector<double> coeff2(nt);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        Vec2 g1{}, g2{}, g3{};
        double c = 0.0;
        for (int k = 0; k < 3; ++k) {
            Vec2 g = mesh.basis_gradient(t, k);
            g1 = g1 + state_new.u1[tri[k]] * g;
            g2 = g2 + state_new.u2[tri[k]] * g;
            g3 = g3 + state_new.u3[tri[k]] * g;
            c += params.d2 * (1.0 - state_new.u1[tri[k]]) / 3.0;
        }
        grad_u1[t] = g1;
        grad_u2[t] = g2;
        grad_u3[t] = g3;
        coeff2[t] = std::max(c, 0.0);
    }

    // flux jumps per edge
    std::vector<double> edge_jump_sq(ne, 0.0);  // |J_S|^2 (both components)
    for (int e = 0; e < ne; ++e) {
        int tp = mesh.edge_tris[e][0], tm = mesh.edge_tris[e][1];
        int kp = 0;
        while (mesh.tri_edges[tp][kp] != e) ++kp;
        Vec2 nu = mesh.edge_normal(tp, kp);
        double j2, j3;
        if (tm >= 0) {
            j2 = dot(coeff2[tp] * grad_u2[tp] - coeff2[tm] * grad_u2[tm], nu);
            j3 = dot(grad_u3[tp] - grad_u3[tm], nu);
        } else {  // boundary: Neumann mismatch against zero flux
            j2 = dot(coeff2[tp] * grad_u2[tp], nu);
            j3 = dot(grad_u3[tp], nu);
        }
        edge_jump_sq[e] = j2 * j2 + j3 * j3;
    }

    ErrorIndicators ind;
    ind.per_element.assign(nt, 0.0);
    ind.per_edge.assign(ne, 0.0);
    for (int e = 0; e < ne; ++e) {
        double hs = mesh.edge_length(e);
        ind.per_edge[e] = std::sqrt(hs * hs * edge_jump_sq[e]);
    }

    std::vector<double> eta_sq(nt, 0.0);
    parallel_for(nt, workers, [&](int t) {
        const auto& tri = mesh.triangles[t];
        double a = mesh.area(t);
        double ht = mesh.diameter(t);

        // element residual at the three edge midpoints (degree-2 quadrature)
        double rnorm_sq = 0.0;
        for (int q = 0; q < 3; ++q) {
            int i = tri[q], j = tri[(q + 1) % 3];
            double u1 = 0.5 * (state_new.u1[i] + state_new.u1[j]);
            double u2 = 0.5 * (state_new.u2[i] + state_new.u2[j]);
            double u3 = 0.5 * (state_new.u3[i] + state_new.u3[j]);
            double u1o = 0.5 * (state_old.u1[i] + state_old.u1[j]);
            double u2o = 0.5 * (state_old.u2[i] + state_old.u2[j]);
            double u3o = 0.5 * (state_old.u3[i] + state_old.u3[j]);
            // strong operator on P1: Laplacian vanishes, only the
            // coefficient-gradient part of the u2 diffusion survives
            double r1 = (u1 - u1o) / tau - (u1 * (1.0 - u1) - params.delta1 * u1 * u3);
            double r2 = (u2 - u2o) / tau + params.d2 * dot(grad_u1[t], grad_u2[t]) -
                        params.rho2 * u2 * (1.0 - u2);
            double r3 = (u3 - u3o) / tau - params.delta3 * (u2 - u3);
            rnorm_sq += (a / 3.0) * (r1 * r1 + r2 * r2 + r3 * r3);
        }

        double jump_term = 0.0;
        for (int k = 0; k < 3; ++k) {
            int e = mesh.tri_edges[t][k];
            double hs = mesh.edge_length(e);
            jump_term += hs * hs * edge_jump_sq[e];  // H_S * ||J_S||^2_{L2(S)}
        }
        eta_sq[t] = ht * ht * rnorm_sq + jump_term;
    });

    double total = 0.0;
    for (int t = 0; t < nt; ++t) {
        ind.per_element[t] = std::sqrt(eta_sq[t]);
        total += eta_sq[t];
    }
    ind.global = std::sqrt(total);
    return ind;
}

namespace {

StateField transfer_state(const StateField& s, const Mesh& from, const Mesh& to) {
    StateField out;
    out.time = s.time;
    out.u1 = transfer(s.u1, from, to);
    out.u2 = transfer(s.u2, from, to);
    out.u3 = transfer(s.u3, from, to);
    return out;
}

}  // namespace

Trajectory solve_direct(const ModelParams& params, const SolverConfig& config,
                        const InitialCondition& ic, const StepCallback& on_step) {
    config.validate();
    const int n_steps = config.num_steps();

    Trajectory traj;
    traj.coarse_mesh = make_uniform_mesh(config.coarse_n);

    Mesh work = traj.coarse_mesh;
    StateField prev = initial_condition(work, ic);

    traj.times.push_back(0.0);
    traj.states.push_back(prev);

    for (int n = 1; n <= n_steps; ++n) {
        int refines = 0;
        StateField accepted;
        double eta = 0.0;
        for (;;) {
            StateField after_reaction =
                reaction_step(work, prev, params, config.tau, config.reaction_abs_tol,
                              config.reaction_rel_tol, config.workers);
            StateField after_diffusion =
                diffusion_step(work, after_reaction, params, config.tau, config.cg_tol);
            ErrorIndicators ind = estimate_error(work, after_diffusion, prev, config.tau, params,
                                                 config.workers);
            eta = ind.global;
            if (eta < config.eps_tol || refines >= config.max_refines_per_step) {
                if (eta >= config.eps_tol) ++traj.warnings;
                accepted = after_diffusion;
                if (config.positivity_cutoff) {
                    accepted.u1 = accepted.u1.cwiseMax(0.0);
                    accepted.u2 = accepted.u2.cwiseMax(0.0);
                    accepted.u3 = accepted.u3.cwiseMax(0.0);
                }
                break;
            }
            std::vector<double> eta_sq(ind.per_element.size());
            for (size_t i = 0; i < eta_sq.size(); ++i)
                eta_sq[i] = ind.per_element[i] * ind.per_element[i];
            Mesh refined = rgb_refine(work, bulk_mark(eta_sq, config.theta));
            prev = transfer_state(prev, work, refined);
            work = std::move(refined);
            ++refines;
        }
        traj.times.push_back(n * config.tau);
        traj.states.push_back(transfer_state(accepted, work, traj.coarse_mesh));
        traj.refines_per_step.push_back(refines);
        traj.eta_per_step.push_back(eta);
        if (on_step) on_step(n, refines, eta);
        prev = std::move(accepted);
    }
    return traj;
}

}  // namespace acidfront
