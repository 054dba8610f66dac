#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "acidfront/adjoint.hpp"
#include "acidfront/forward.hpp"
#include "acidfront/rng.hpp"

using namespace acidfront;

namespace {

constexpr double kTightTol = 1e-12;

StateField random_state(const Mesh& m, SplitMix64& rng) {
    StateField s;
    s.u1.resize(m.num_nodes());
    s.u2.resize(m.num_nodes());
    s.u3.resize(m.num_nodes());
    for (int v = 0; v < m.num_nodes(); ++v) {
        s.u1[v] = rng.next_uniform();
        s.u2[v] = rng.next_uniform();
        s.u3[v] = rng.next_uniform();
    }
    return s;
}

// one forward time step with tight tolerances (for finite-difference oracles)
StateField forward_step(const Mesh& m, const StateField& s, const ModelParams& p, double tau) {
    StateField mid = reaction_step(m, s, p, tau, kTightTol, kTightTol);
    return diffusion_step(m, mid, p, tau, kTightTol);
}

// stack (u1, u2, u3) into one vector and back
Eigen::VectorXd pack(const StateField& s) {
    int n = static_cast<int>(s.u1.size());
    Eigen::VectorXd x(3 * n);
    x.segment(0, n) = s.u1;
    x.segment(n, n) = s.u2;
    x.segment(2 * n, n) = s.u3;
    return x;
}

StateField unpack(const Eigen::VectorXd& x, double time = 0.0) {
    int n = static_cast<int>(x.size()) / 3;
    StateField s;
    s.u1 = x.segment(0, n);
    s.u2 = x.segment(n, n);
    s.u3 = x.segment(2 * n, n);
    s.time = time;
    return s;
}

// central finite-difference Jacobian of the full split step
Eigen::MatrixXd step_jacobian(const Mesh& m, const StateField& s, const ModelParams& p,
                              double tau, double h) {
    int n = 3 * m.num_nodes();
    Eigen::VectorXd x0 = pack(s);
    Eigen::MatrixXd P(n, n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd xp = x0, xm = x0;
        xp[j] += h;
        xm[j] -= h;
        P.col(j) = (pack(forward_step(m, unpack(xp), p, tau)) -
                    pack(forward_step(m, unpack(xm), p, tau))) /
                   (2.0 * h);
    }
    return P;
}

Trajectory desk_trajectory(double delta1, double t_final = 2.0) {
    SolverConfig cfg;
    cfg.tau = 0.1;
    cfg.t_final = t_final;
    cfg.coarse_n = 8;
    cfg.eps_tol = 1e9;  // fixed mesh keeps J smooth in delta1
    cfg.reaction_abs_tol = kTightTol;
    cfg.reaction_rel_tol = kTightTol;
    cfg.cg_tol = kTightTol;
    cfg.positivity_cutoff = false;  // the adjoint transposes the smooth map
    ModelParams p{delta1, 1.0, 1e-2, 1.0};
    InitialCondition ic;
    ic.width_sq = 0.05;
    return solve_direct(p, cfg, ic);
}

std::vector<NodalField> u3_series(const Trajectory& t) {
    std::vector<NodalField> out;
    for (const auto& s : t.states) out.push_back(s.u3);
    return out;
}

}  // namespace

TEST_CASE("adjoint step") {
    Mesh m = make_uniform_mesh(1);
    ModelParams p{12.5, 1.0, 1e-2, 1.0};
    SplitMix64 rng(51);
    StateField prev = random_state(m, rng);
    StateField next = forward_step(m, prev, p, 0.1);

    SUBCASE("zero multiplier and zero misfit give zero") {
        std::array<NodalField, 3> lam{NodalField::Zero(m.num_nodes()),
                                      NodalField::Zero(m.num_nodes()),
                                      NodalField::Zero(m.num_nodes())};
        auto out = adjoint_step(m, lam, prev, next, prev.u3, p, 0.1);
        for (int c = 0; c < 3; ++c) CHECK(out[c].cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("transpose identity against a finite-difference step Jacobian") {
        // the adjoint step without misfit source must satisfy
        //   M lambda_out = P^T M lambda_next,  P = d(forward step)/d(state)
        const int n = m.num_nodes();
        std::array<NodalField, 3> lam;
        for (int c = 0; c < 3; ++c) {
            lam[c].resize(n);
            for (int v = 0; v < n; ++v) lam[c][v] = rng.next_uniform() - 0.5;
        }
        auto out = adjoint_step(m, lam, prev, next, prev.u3, p, 0.1, 0.0);

        Eigen::MatrixXd P = step_jacobian(m, prev, p, 0.1, 1e-6);
        SparseMatrix M = assemble_mass(m);
        Eigen::VectorXd My(3 * n);
        My.segment(0, n) = M * lam[0];
        My.segment(n, n) = M * lam[1];
        My.segment(2 * n, n) = M * lam[2];
        Eigen::VectorXd ref = P.transpose() * My;
        Eigen::VectorXd mine(3 * n);
        mine.segment(0, n) = M * out[0];
        mine.segment(n, n) = M * out[1];
        mine.segment(2 * n, n) = M * out[2];
        CHECK((mine - ref).cwiseAbs().maxCoeff() < 1e-7 * (1.0 + ref.cwiseAbs().maxCoeff()));
    }
    SUBCASE("misfit source enters only lambda3 with weight tau") {
        std::array<NodalField, 3> lam{NodalField::Zero(m.num_nodes()),
                                      NodalField::Zero(m.num_nodes()),
                                      NodalField::Zero(m.num_nodes())};
        NodalField data = prev.u3.array() + 0.2;
        auto out = adjoint_step(m, lam, prev, next, data, p, 0.1, 1.0);
        CHECK(out[0].cwiseAbs().maxCoeff() < 1e-12);
        CHECK(out[1].cwiseAbs().maxCoeff() < 1e-12);
        CHECK((out[2] - 0.1 * 0.2 * NodalField::Ones(m.num_nodes())).cwiseAbs().maxCoeff() <
              1e-12);
    }
    SUBCASE("delta1 = 0 decouples lambda3 from lambda1") {
        ModelParams q{0.0, 1.0, 1e-2, 1.0};
        StateField qnext = forward_step(m, prev, q, 0.1);
        std::array<NodalField, 3> lam{NodalField::Zero(m.num_nodes()),
                                      NodalField::Zero(m.num_nodes()),
                                      NodalField::Zero(m.num_nodes())};
        auto base = adjoint_step(m, lam, prev, qnext, prev.u3, q, 0.1);
        lam[0] = NodalField::Ones(m.num_nodes());
        auto pert = adjoint_step(m, lam, prev, qnext, prev.u3, q, 0.1);
        CHECK((base[2] - pert[2]).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("solve_adjoint") {
    Trajectory traj = desk_trajectory(12.5, 1.0);
    ModelParams p{12.5, 1.0, 1e-2, 1.0};

    SUBCASE("data equal to the forward solution gives the zero adjoint") {
        AdjointTrajectory adj = solve_adjoint(traj, u3_series(traj), p);
        for (const auto& lam : adj.lambdas)
            for (int c = 0; c < 3; ++c) CHECK(lam[c].cwiseAbs().maxCoeff() < 1e-11);
        CHECK(adj.terminal_misfit.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("final stored level is exactly zero") {
        auto data = u3_series(traj);
        for (auto& d : data) d.array() += 0.05;
        AdjointTrajectory adj = solve_adjoint(traj, data, p);
        for (int c = 0; c < 3; ++c) CHECK(adj.lambdas.back()[c].cwiseAbs().maxCoeff() == 0.0);
        CHECK((adj.terminal_misfit + 0.05 * NodalField::Ones(adj.terminal_misfit.size()))
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
    }
    SUBCASE("levels are minus the mass-weighted state derivative of the objective") {
        // restart oracle on mesh(1): lambda^k = -M^{-1} dJ_tail/du^k where
        // J_tail collects the misfit terms from level k onward and the
        // forward march is restarted from the perturbed state
        SolverConfig cfg;
        cfg.tau = 0.1;
        cfg.t_final = 0.3;
        cfg.coarse_n = 1;
        cfg.eps_tol = 1e9;
        cfg.reaction_abs_tol = kTightTol;
        cfg.reaction_rel_tol = kTightTol;
        cfg.cg_tol = kTightTol;
        cfg.positivity_cutoff = false;
        InitialCondition ic;
        ic.width_sq = 0.05;
        Trajectory small = solve_direct(p, cfg, ic);
        const Mesh& m = small.coarse_mesh;
        const int n = m.num_nodes();
        const int levels = small.num_levels();
        const double tau = small.tau();
        auto data = u3_series(small);
        for (auto& d : data) d.array() += 0.1;
        AdjointTrajectory adj = solve_adjoint(small, data, p);
        SparseMatrix M = assemble_mass(m);

        auto tail = [&](int k, const StateField& at_k) {
            double j = 0.0;
            StateField s = at_k;
            for (int lvl = k; lvl < levels; ++lvl) {
                if (lvl > k) s = forward_step(m, s, p, tau);
                double w = (lvl == 0 || lvl == levels - 1) ? 0.5 : 1.0;
                NodalField e = s.u3 - data[lvl];
                j += 0.5 * w * tau * e.dot(M * e);
            }
            return j;
        };

        const double h = 1e-6;
        for (int k : {0, 1}) {
            Eigen::VectorXd x0 = pack(small.states[k]);
            Eigen::VectorXd grad(3 * n);
            for (int j = 0; j < 3 * n; ++j) {
                Eigen::VectorXd xp = x0, xm = x0;
                xp[j] += h;
                xm[j] -= h;
                grad[j] = (tail(k, unpack(xp)) - tail(k, unpack(xm))) / (2.0 * h);
            }
            Eigen::VectorXd lam_ref(3 * n);
            for (int c = 0; c < 3; ++c)
                lam_ref.segment(c * n, n) =
                    -solve_spd(M, grad.segment(c * n, n).eval(), 1e-13);
            for (int c = 0; c < 3; ++c)
                CHECK((adj.lambdas[k][c] - lam_ref.segment(c * n, n)).cwiseAbs().maxCoeff() <
                      1e-6);
        }
    }
    SUBCASE("adjoint is linear in the misfit") {
        auto data = u3_series(traj);
        for (auto& d : data) d.array() -= 0.02;
        std::vector<NodalField> data2(data.size());
        for (size_t i = 0; i < data.size(); ++i)
            data2[i] = traj.states[i].u3 - 3.0 * (traj.states[i].u3 - data[i]);
        AdjointTrajectory a = solve_adjoint(traj, data, p);
        AdjointTrajectory b = solve_adjoint(traj, data2, p);
        for (size_t lvl = 0; lvl + 1 < a.lambdas.size(); ++lvl)
            for (int c = 0; c < 3; ++c)
                CHECK((3.0 * a.lambdas[lvl][c] - b.lambdas[lvl][c]).cwiseAbs().maxCoeff() <
                      1e-9);
    }
}

TEST_CASE("objective") {
    Trajectory traj = desk_trajectory(12.5, 1.0);

    SUBCASE("zero misfit") {
        CHECK(objective(traj, u3_series(traj)) == 0.0);
    }
    SUBCASE("constant misfit c gives c^2 T / 2") {
        auto data = u3_series(traj);
        for (auto& d : data) d.array() += 0.3;
        CHECK(objective(traj, data) == doctest::Approx(0.5 * 0.09 * 1.0).epsilon(1e-9));
    }
    SUBCASE("matches a per-triangle midpoint quadrature oracle") {
        auto data = u3_series(traj);
        SplitMix64 rng(61);
        for (auto& d : data)
            for (Eigen::Index i = 0; i < d.size(); ++i) d[i] += 0.1 * (rng.next_uniform() - 0.5);
        double mine = objective(traj, data);

        // edge-midpoint rule is exact for the squared P1 misfit
        const Mesh& m = traj.coarse_mesh;
        double ref = 0.0;
        for (int lvl = 0; lvl < traj.num_levels(); ++lvl) {
            double w = (lvl == 0 || lvl == traj.num_levels() - 1) ? 0.5 : 1.0;
            NodalField e = traj.states[lvl].u3 - data[lvl];
            double space = 0.0;
            for (int t = 0; t < m.num_triangles(); ++t) {
                auto& tri = m.triangles[t];
                double a = m.area(t);
                for (int q = 0; q < 3; ++q) {
                    double val = 0.5 * (e[tri[q]] + e[tri[(q + 1) % 3]]);
                    space += (a / 3.0) * val * val;
                }
            }
            ref += 0.5 * w * traj.tau() * space;
        }
        CHECK(mine == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("reduced gradient") {
    SUBCASE("zero adjoint gives zero gradient") {
        Trajectory traj = desk_trajectory(12.5, 1.0);
        ModelParams p{12.5, 1.0, 1e-2, 1.0};
        AdjointTrajectory adj = solve_adjoint(traj, u3_series(traj), p);
        CHECK(std::abs(reduced_gradient(traj, adj)) < 1e-12);
    }
    SUBCASE("gradient vanishes at the data-generating parameter") {
        Trajectory data_traj = desk_trajectory(10.0);
        auto data = u3_series(data_traj);
        ModelParams p{10.0, 1.0, 1e-2, 1.0};
        AdjointTrajectory adj = solve_adjoint(data_traj, data, p);
        CHECK(std::abs(reduced_gradient(data_traj, adj)) < 1e-10);
    }
    SUBCASE("matches central finite differences of the discrete objective") {
        auto data = u3_series(desk_trajectory(10.0));
        auto eval_J = [&](double d1) { return objective(desk_trajectory(d1), data); };
        for (double d1 : {6.0, 13.0}) {
            Trajectory traj = desk_trajectory(d1);
            ModelParams p{d1, 1.0, 1e-2, 1.0};
            double g = reduced_gradient(traj, solve_adjoint(traj, data, p));
            double h = 1e-3;
            double fd = (eval_J(d1 + h) - eval_J(d1 - h)) / (2.0 * h);
            CHECK(g == doctest::Approx(fd).epsilon(0.01));
        }
    }
    SUBCASE("sign property around the generating parameter") {
        auto data = u3_series(desk_trajectory(10.0));
        auto grad_at = [&](double d1) {
            Trajectory traj = desk_trajectory(d1);
            ModelParams p{d1, 1.0, 1e-2, 1.0};
            return reduced_gradient(traj, solve_adjoint(traj, data, p));
        };
        CHECK(grad_at(8.0) < 0.0);
        CHECK(grad_at(12.0) > 0.0);
    }
    SUBCASE("finite-difference gap shrinks with tau") {
        auto make = [&](double tau, double d1) {
            SolverConfig cfg;
            cfg.tau = tau;
            cfg.t_final = 1.0;
            cfg.coarse_n = 8;
            cfg.eps_tol = 1e9;
            cfg.reaction_abs_tol = kTightTol;
            cfg.reaction_rel_tol = kTightTol;
            cfg.cg_tol = kTightTol;
            cfg.positivity_cutoff = false;
            ModelParams p{d1, 1.0, 1e-2, 1.0};
            InitialCondition ic;
            ic.width_sq = 0.05;
            return solve_direct(p, cfg, ic);
        };
        auto gap = [&](double tau) {
            auto data_tau = u3_series(make(tau, 10.0));
            double d1 = 13.0;
            Trajectory traj = make(tau, d1);
            ModelParams p{d1, 1.0, 1e-2, 1.0};
            double g = reduced_gradient(traj, solve_adjoint(traj, data_tau, p));
            double h = 1e-3;
            double fd = (objective(make(tau, d1 + h), data_tau) -
                         objective(make(tau, d1 - h), data_tau)) /
                        (2.0 * h);
            return std::abs(g - fd) / std::abs(fd);
        };
        CHECK(gap(0.1) < 0.01);
        CHECK(gap(0.05) < gap(0.1));
    }
}
