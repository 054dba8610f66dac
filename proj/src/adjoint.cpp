#include "acidfront/adjoint.hpp"

#include <stdexcept>

#include "acidfront/ode.hpp"

namespace acidfront {

namespace {

constexpr double kSolveTol = 1e-13;     // SPD solves inside the adjoint
constexpr double kFlowTol = 1e-10;      // variational reaction integration

// Transport lambda^n through the transpose of the semi-implicit diffusion
// half step.  The u2 coefficient uses the post-step u1 (the forward solve
// freezes it after the reaction), and the cross term carries the coefficient
// sensitivity of the u2 diffusion to u1 into the lambda1 slot.
std::array<NodalField, 3> diffusion_transpose(const Mesh& mesh, const SparseMatrix& M,
                                              const SparseMatrix& K3,
                                              const std::array<NodalField, 3>& lambda_next,
                                              const StateField& state_next,
                                              const ModelParams& params, double tau) {
    const int n = mesh.num_nodes();
    const NodalField ones = NodalField::Ones(n);
    SparseMatrix K2 =
        assemble_stiffness(mesh, (params.d2 * (ones - state_next.u1)).cwiseMax(0.0).eval());
    SparseMatrix A2 = M + tau * K2;
    SparseMatrix A3 = M + tau * K3;
    NodalField lt2 = solve_spd(A2, (M * lambda_next[1]).eval(), kSolveTol);
    NodalField lt3 = solve_spd(A3, (M * lambda_next[2]).eval(), kSolveTol);

    NodalField cross = NodalField::Zero(n);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        // elements where the diffusion coefficient was clamped to zero have
        // no sensitivity to u1
        double cmean = params.d2 * (3.0 - state_next.u1[tri[0]] - state_next.u1[tri[1]] -
                                    state_next.u1[tri[2]]) / 3.0;
        if (cmean < 0.0) continue;
        double a = mesh.area(t);
        Vec2 gu2{}, gl2{};
        for (int k = 0; k < 3; ++k) {
            gu2 = gu2 + state_next.u2[tri[k]] * mesh.basis_gradient(t, k);
            gl2 = gl2 + lt2[tri[k]] * mesh.basis_gradient(t, k);
        }
        double val = -(params.d2 / 3.0) * a * dot(gu2, gl2);
        for (int i = 0; i < 3; ++i) cross[tri[i]] += val;
    }
    NodalField lt1 = lambda_next[0] - tau * solve_spd(M, cross.eval(), kSolveTol);
    return {lt1, lt2, lt3};
}

// 3x3 reaction Jacobian entries at a nodal state
struct ReactionJac {
    double j11, j13, j22, j32, j33;
};

ReactionJac reaction_jacobian(double u1, double u2, double u3, const ModelParams& p) {
    return {1.0 - 2.0 * u1 - p.delta1 * u3, -p.delta1 * u1, p.rho2 * (1.0 - 2.0 * u2),
            p.delta3, -p.delta3};
}

}  // namespace

std::array<NodalField, 3> adjoint_step(const Mesh& mesh,
                                       const std::array<NodalField, 3>& lambda_next,
                                       const StateField& state_prev,
                                       const StateField& state_next,
                                       const NodalField& data_u3, const ModelParams& params,
                                       double tau, double misfit_weight) {
    const int n = mesh.num_nodes();
    SparseMatrix M = assemble_mass(mesh);
    SparseMatrix K3 = assemble_stiffness_unit(mesh);
    auto lt = diffusion_transpose(mesh, M, K3, lambda_next, state_next, params, tau);

    NodalField y1 = M * lt[0], y2 = M * lt[1], y3 = M * lt[2];
    NodalField z1(n), z2(n), z3(n);
    for (int v = 0; v < n; ++v) {
        // state plus variational matrix of the reaction flow: 12 ODEs
        std::array<double, 12> y{state_prev.u1[v], state_prev.u2[v], state_prev.u3[v],
                                 1, 0, 0, 0, 1, 0, 0, 0, 1};
        auto rhs = [&params](const std::array<double, 12>& s) {
            std::array<double, 12> d{};
            double u1 = s[0], u2 = s[1], u3 = s[2];
            d[0] = u1 * (1.0 - u1) - params.delta1 * u1 * u3;
            d[1] = params.rho2 * u2 * (1.0 - u2);
            d[2] = params.delta3 * (u2 - u3);
            ReactionJac j = reaction_jacobian(u1, u2, u3, params);
            for (int col = 0; col < 3; ++col) {
                double p1 = s[3 + col], p2 = s[6 + col], p3 = s[9 + col];
                d[3 + col] = j.j11 * p1 + j.j13 * p3;
                d[6 + col] = j.j22 * p2;
                d[9 + col] = j.j32 * p2 + j.j33 * p3;
            }
            return d;
        };
        y = rk45_integrate<12>(y, 0.0, tau, rhs, kFlowTol, kFlowTol);
        // transpose of the flow Jacobian applied to the mass-paired field
        z1[v] = y[3] * y1[v] + y[6] * y2[v] + y[9] * y3[v];
        z2[v] = y[4] * y1[v] + y[7] * y2[v] + y[10] * y3[v];
        z3[v] = y[5] * y1[v] + y[8] * y2[v] + y[11] * y3[v];
    }
    std::array<NodalField, 3> out;
    out[0] = solve_spd(M, z1, kSolveTol);
    out[1] = solve_spd(M, z2, kSolveTol);
    out[2] = solve_spd(M, z3, kSolveTol);
    out[2] -= misfit_weight * tau * (state_prev.u3 - data_u3);
    return out;
}

AdjointTrajectory solve_adjoint(const Trajectory& trajectory,
                                const std::vector<NodalField>& data_u3,
                                const ModelParams& params) {
    const int levels = trajectory.num_levels();
    if (static_cast<int>(data_u3.size()) != levels)
        throw std::invalid_argument("solve_adjoint: data level count mismatch");
    const Mesh& mesh = trajectory.coarse_mesh;
    const int n = mesh.num_nodes();
    const double tau = trajectory.tau();

    AdjointTrajectory adj;
    adj.coarse_mesh = mesh;
    adj.times = trajectory.times;
    adj.lambdas.assign(levels, {NodalField::Zero(n), NodalField::Zero(n), NodalField::Zero(n)});
    adj.terminal_misfit = trajectory.states[levels - 1].u3 - data_u3[levels - 1];
    adj.params = params;

    // the stored final level is zero; the trapezoid half-weight of the final
    // misfit enters the march as an effective terminal multiplier
    std::array<NodalField, 3> lam = {NodalField::Zero(n), NodalField::Zero(n),
                                     (-0.5 * tau * adj.terminal_misfit).eval()};
    for (int lvl = levels - 1; lvl >= 1; --lvl) {
        double w = (lvl - 1 == 0) ? 0.5 : 1.0;
        lam = adjoint_step(mesh, lam, trajectory.states[lvl - 1], trajectory.states[lvl],
                           data_u3[lvl - 1], params, tau, w);
        adj.lambdas[lvl - 1] = lam;
    }
    return adj;
}

double reduced_gradient(const Trajectory& trajectory, const AdjointTrajectory& adjoint) {
    const int levels = trajectory.num_levels();
    if (static_cast<int>(adjoint.lambdas.size()) != levels)
        throw std::invalid_argument("reduced_gradient: level count mismatch");
    const Mesh& mesh = trajectory.coarse_mesh;
    const int n = mesh.num_nodes();
    const double tau = trajectory.tau();
    const ModelParams& params = adjoint.params;
    SparseMatrix M = assemble_mass(mesh);
    SparseMatrix K3 = assemble_stiffness_unit(mesh);

    double g = 0.0;
    for (int lvl = levels - 1; lvl >= 1; --lvl) {
        // multiplier entering the step from t_{n-1} to t_n; stored levels
        // already include their own misfit source
        std::array<NodalField, 3> lam;
        if (lvl == levels - 1) {
            lam = {NodalField::Zero(n), NodalField::Zero(n),
                   (-0.5 * tau * adjoint.terminal_misfit).eval()};
        } else {
            lam = adjoint.lambdas[lvl];
        }
        auto lt = diffusion_transpose(mesh, M, K3, lam, trajectory.states[lvl], params, tau);
        NodalField y1 = M * lt[0], y2 = M * lt[1], y3 = M * lt[2];
        for (int v = 0; v < n; ++v) {
            // state plus delta1-sensitivity of the reaction flow: 6 ODEs
            std::array<double, 6> y{trajectory.states[lvl - 1].u1[v],
                                    trajectory.states[lvl - 1].u2[v],
                                    trajectory.states[lvl - 1].u3[v], 0, 0, 0};
            auto rhs = [&params](const std::array<double, 6>& s) {
                std::array<double, 6> d{};
                double u1 = s[0], u2 = s[1], u3 = s[2];
                d[0] = u1 * (1.0 - u1) - params.delta1 * u1 * u3;
                d[1] = params.rho2 * u2 * (1.0 - u2);
                d[2] = params.delta3 * (u2 - u3);
                ReactionJac j = reaction_jacobian(u1, u2, u3, params);
                d[3] = j.j11 * s[3] + j.j13 * s[5] - u1 * u3;
                d[4] = j.j22 * s[4];
                d[5] = j.j32 * s[4] + j.j33 * s[5];
                return d;
            };
            y = rk45_integrate<6>(y, 0.0, tau, rhs, kFlowTol, kFlowTol);
            g -= y[3] * y1[v] + y[4] * y2[v] + y[5] * y3[v];
        }
    }
    return g;
}

double objective(const Trajectory& trajectory, const std::vector<NodalField>& data_u3) {
    const int levels = trajectory.num_levels();
    if (static_cast<int>(data_u3.size()) != levels)
        throw std::invalid_argument("objective: data level count mismatch");
    SparseMatrix M = assemble_mass(trajectory.coarse_mesh);
    const double tau = trajectory.tau();
    double j = 0.0;
    for (int lvl = 0; lvl < levels; ++lvl) {
        double w = (lvl == 0 || lvl == levels - 1) ? 0.5 : 1.0;
        NodalField e = trajectory.states[lvl].u3 - data_u3[lvl];
        j += 0.5 * w * tau * e.dot(M * e);
    }
    return j;
}

}  // namespace acidfront
