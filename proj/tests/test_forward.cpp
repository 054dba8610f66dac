#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "acidfront/forward.hpp"
#include "acidfront/rng.hpp"

using namespace acidfront;

namespace {

StateField uniform_state(const Mesh& m, double u1, double u2, double u3) {
    StateField s;
    s.u1 = NodalField::Constant(m.num_nodes(), u1);
    s.u2 = NodalField::Constant(m.num_nodes(), u2);
    s.u3 = NodalField::Constant(m.num_nodes(), u3);
    return s;
}

double logistic(double y0, double r, double t) {
    // closed form of dy/dt = r y (1 - y)
    return y0 * std::exp(r * t) / (1.0 + y0 * (std::exp(r * t) - 1.0));
}

}  // namespace

TEST_CASE("initial conditions") {
    Mesh m = make_uniform_mesh(10);
    InitialCondition ic;  // gaussian-seed, center (0.5, 0.5), w^2 = 0.01
    StateField s = initial_condition(m, ic);

    int center = -1, off = -1;
    for (int v = 0; v < m.num_nodes(); ++v) {
        if (std::abs(m.nodes[v].x - 0.5) < 1e-12 && std::abs(m.nodes[v].y - 0.5) < 1e-12)
            center = v;
        if (std::abs(m.nodes[v].x - 0.6) < 1e-12 && std::abs(m.nodes[v].y - 0.5) < 1e-12)
            off = v;  // distance w = 0.1 from the center
    }
    REQUIRE(center >= 0);
    REQUIRE(off >= 0);
    CHECK(s.u2[center] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.u1[center] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(s.u3[center] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.u2[off] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    for (int v = 0; v < m.num_nodes(); ++v)
        CHECK(s.u1[v] + s.u2[v] == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS(initial_condition(m, InitialCondition{.kind = "nope"}));
}

TEST_CASE("reaction step") {
    Mesh m = make_uniform_mesh(2);
    ModelParams p{12.5, 1.0, 4e-5, 1.0};

    SUBCASE("fixed points are preserved") {
        for (auto [a, b, c] : {std::array<double, 3>{0, 0, 0}, std::array<double, 3>{1, 0, 0}}) {
            StateField s = uniform_state(m, a, b, c);
            StateField out = reaction_step(m, s, p, 0.5, 1e-10, 1e-10);
            CHECK(out.u1[0] == doctest::Approx(a).epsilon(1e-9));
            CHECK(out.u2[0] == doctest::Approx(b).epsilon(1e-9));
            CHECK(out.u3[0] == doctest::Approx(c).epsilon(1e-9));
        }
    }
    SUBCASE("logistic closed form for u2") {
        StateField s = uniform_state(m, 1.0, 0.5, 0.0);
        StateField out = reaction_step(m, s, p, 0.1, 1e-10, 1e-9);
        CHECK(out.u2[0] == doctest::Approx(logistic(0.5, 1.0, 0.1)).epsilon(1e-8));
        CHECK(out.u2[0] == doctest::Approx(std::exp(0.1) / (1 + std::exp(0.1))).epsilon(1e-7));
    }
    SUBCASE("u3 relaxation closed form with u2 = 0") {
        ModelParams q{0.0, 1.0, 4e-5, 2.0};
        StateField s = uniform_state(m, 1.0, 0.0, 0.7);
        StateField out = reaction_step(m, s, q, 1.0, 1e-10, 1e-9);
        CHECK(out.u3[0] == doctest::Approx(0.7 * std::exp(-2.0)).epsilon(1e-7));
    }
    SUBCASE("reaction flow keeps the physical box on random data") {
        SplitMix64 rng(31);
        StateField s = uniform_state(m, 0, 0, 0);
        for (int v = 0; v < m.num_nodes(); ++v) {
            s.u1[v] = rng.next_uniform();
            s.u2[v] = rng.next_uniform();
            s.u3[v] = rng.next_uniform();
        }
        StateField out = reaction_step(m, s, p, 1.0, 1e-10, 1e-8);
        for (int v = 0; v < m.num_nodes(); ++v) {
            CHECK(out.u1[v] >= -1e-8);
            CHECK(out.u1[v] <= 1.0 + 1e-8);
            CHECK(out.u2[v] >= -1e-8);
            CHECK(out.u2[v] <= 1.0 + 1e-8);
            CHECK(out.u3[v] >= -1e-8);
        }
    }
    SUBCASE("workers do not change the result") {
        SplitMix64 rng(37);
        StateField s = uniform_state(m, 0, 0, 0);
        for (int v = 0; v < m.num_nodes(); ++v) {
            s.u1[v] = rng.next_uniform();
            s.u2[v] = rng.next_uniform();
            s.u3[v] = rng.next_uniform();
        }
        StateField a = reaction_step(m, s, p, 0.3, 1e-8, 1e-6, 1);
        StateField b = reaction_step(m, s, p, 0.3, 1e-8, 1e-6, 4);
        for (int v = 0; v < m.num_nodes(); ++v) {
            CHECK(a.u1[v] == b.u1[v]);
            CHECK(a.u2[v] == b.u2[v]);
            CHECK(a.u3[v] == b.u3[v]);
        }
    }
}

TEST_CASE("diffusion step") {
    Mesh m = make_uniform_mesh(4);
    ModelParams p{12.5, 1.0, 4e-5, 1.0};
    SplitMix64 rng(41);

    SUBCASE("spatially constant u2 is unchanged") {
        StateField s = uniform_state(m, 0.3, 0.8, 0.1);
        StateField out = diffusion_step(m, s, p, 0.1, 1e-12);
        for (int v = 0; v < m.num_nodes(); ++v)
            CHECK(out.u2[v] == doctest::Approx(0.8).epsilon(1e-10));
    }
    SUBCASE("D2 = 0 leaves u2 unchanged") {
        ModelParams q{12.5, 1.0, 0.0, 1.0};
        StateField s = uniform_state(m, 0, 0, 0);
        for (int v = 0; v < m.num_nodes(); ++v) s.u2[v] = rng.next_uniform();
        StateField out = diffusion_step(m, s, q, 0.1, 1e-12);
        for (int v = 0; v < m.num_nodes(); ++v)
            CHECK(out.u2[v] == doctest::Approx(s.u2[v]).epsilon(1e-10));
    }
    SUBCASE("u3 mass is conserved") {
        StateField s = uniform_state(m, 0, 0, 0);
        for (int v = 0; v < m.num_nodes(); ++v) s.u3[v] = rng.next_uniform();
        StateField out = diffusion_step(m, s, p, 0.1, 1e-12);
        SparseMatrix M = assemble_mass(m);
        NodalField ones = NodalField::Ones(m.num_nodes());
        CHECK(ones.dot(M * out.u3) == doctest::Approx(ones.dot(M * s.u3)).epsilon(1e-10));
    }
    SUBCASE("u1 never diffuses") {
        StateField s = uniform_state(m, 0, 0, 0);
        for (int v = 0; v < m.num_nodes(); ++v) s.u1[v] = rng.next_uniform();
        StateField out = diffusion_step(m, s, p, 0.1, 1e-12);
        for (int v = 0; v < m.num_nodes(); ++v) CHECK(out.u1[v] == s.u1[v]);
    }
}

TEST_CASE("error estimator") {
    ModelParams p{12.5, 1.0, 4e-5, 1.0};

    SUBCASE("steady uniform equilibrium has zero estimator") {
        Mesh m = make_uniform_mesh(4);
        StateField s = uniform_state(m, 1.0, 0.0, 0.0);
        ErrorIndicators ind = estimate_error(m, s, s, 0.1, p);
        CHECK(ind.global < 1e-14);
    }
    SUBCASE("globally affine u3 has no interior jumps") {
        Mesh m = make_uniform_mesh(4);
        StateField s = uniform_state(m, 0.5, 0.0, 0.0);
        for (int v = 0; v < m.num_nodes(); ++v) s.u3[v] = 0.2 * m.nodes[v].x;
        ErrorIndicators ind = estimate_error(m, s, s, 0.1, p);
        for (int e = 0; e < m.num_edges(); ++e)
            if (!m.boundary_edge[e]) CHECK(ind.per_edge[e] < 1e-13);
    }
    SUBCASE("eta(Omega)^2 equals the sum over elements") {
        Mesh m = make_uniform_mesh(4);
        SplitMix64 rng(43);
        StateField s = uniform_state(m, 0, 0, 0);
        for (int v = 0; v < m.num_nodes(); ++v) {
            s.u1[v] = rng.next_uniform();
            s.u2[v] = rng.next_uniform();
            s.u3[v] = rng.next_uniform();
        }
        ErrorIndicators ind = estimate_error(m, s, s, 0.1, p);
        double total = 0.0;
        for (double e : ind.per_element) total += e * e;
        CHECK(ind.global * ind.global == doctest::Approx(total).epsilon(1e-10));
    }
    SUBCASE("first-order decay on a manufactured smooth field") {
        // pure-diffusion setting so only the u3 flux jumps contribute
        ModelParams q{0.0, 0.0, 0.0, 0.0};
        double etas[2];
        int idx = 0;
        for (int n : {4, 8}) {
            Mesh m = make_uniform_mesh(n);
            StateField s = uniform_state(m, 1.0, 0.0, 0.0);
            for (int v = 0; v < m.num_nodes(); ++v)
                s.u3[v] = std::cos(M_PI * m.nodes[v].x) * std::cos(M_PI * m.nodes[v].y);
            etas[idx++] = estimate_error(m, s, s, 0.1, q).global;
        }
        double ratio = etas[0] / etas[1];
        CHECK(ratio > 1.5);
        CHECK(ratio < 2.5);
    }
}

TEST_CASE("solve_direct") {
    SUBCASE("uniform equilibrium stays constant with zero refinements") {
        SolverConfig cfg;
        cfg.tau = 0.1;
        cfg.t_final = 1.0;
        cfg.coarse_n = 4;
        cfg.eps_tol = 1e-5;
        InitialCondition ic{.kind = "uniform", .center_x = 1.0, .center_y = 0.0, .width_sq = 0.0};
        ModelParams p{12.5, 1.0, 4e-5, 1.0};
        Trajectory traj = solve_direct(p, cfg, ic);
        REQUIRE(traj.num_levels() == 11);
        for (const auto& s : traj.states) {
            CHECK(s.u1.minCoeff() == doctest::Approx(1.0).epsilon(1e-7));
            CHECK(s.u2.cwiseAbs().maxCoeff() < 1e-8);
            CHECK(s.u3.cwiseAbs().maxCoeff() < 1e-8);
        }
        for (int r : traj.refines_per_step) CHECK(r == 0);
    }
    SUBCASE("delta1 = 0 reduces u1 to the nodal logistic flow") {
        SolverConfig cfg;
        cfg.tau = 0.1;
        cfg.t_final = 1.0;
        cfg.coarse_n = 4;
        InitialCondition ic{.kind = "uniform", .center_x = 0.5, .center_y = 0.0, .width_sq = 0.0};
        ModelParams p{0.0, 1.0, 4e-5, 1.0};
        Trajectory traj = solve_direct(p, cfg, ic);
        double expected = std::exp(1.0) / (1.0 + std::exp(1.0));
        CHECK(traj.states.back().u1[0] == doctest::Approx(expected).epsilon(1e-6));
    }
    SUBCASE("splitting self-convergence in tau is at least first order") {
        InitialCondition ic;  // gaussian seed
        ModelParams p{12.5, 1.0, 4e-5, 1.0};
        auto final_u3 = [&](double tau) {
            SolverConfig cfg;
            cfg.tau = tau;
            cfg.t_final = 0.4;
            cfg.coarse_n = 4;
            cfg.eps_tol = 1e9;  // fixed mesh
            cfg.positivity_cutoff = false;  // cutoff kinks would mask the order
            return solve_direct(p, cfg, ic).states.back().u3;
        };
        NodalField ref = final_u3(0.05 / 4.0);
        double err_coarse = (final_u3(0.2) - ref).norm();
        double err_fine = (final_u3(0.1) - ref).norm();
        CHECK(err_coarse / err_fine >= 1.8);
    }
    SUBCASE("identical runs are bit-identical regardless of worker count") {
        InitialCondition ic;
        ModelParams p{12.5, 1.0, 4e-5, 1.0};
        SolverConfig cfg;
        cfg.tau = 0.1;
        cfg.t_final = 0.3;
        cfg.coarse_n = 4;
        cfg.eps_tol = 0.5;
        cfg.max_refines_per_step = 2;
        cfg.workers = 1;
        Trajectory a = solve_direct(p, cfg, ic);
        cfg.workers = 4;
        Trajectory b = solve_direct(p, cfg, ic);
        REQUIRE(a.num_levels() == b.num_levels());
        for (int lvl = 0; lvl < a.num_levels(); ++lvl) {
            CHECK((a.states[lvl].u1 - b.states[lvl].u1).cwiseAbs().maxCoeff() == 0.0);
            CHECK((a.states[lvl].u2 - b.states[lvl].u2).cwiseAbs().maxCoeff() == 0.0);
            CHECK((a.states[lvl].u3 - b.states[lvl].u3).cwiseAbs().maxCoeff() == 0.0);
        }
    }
    SUBCASE("invalid configs are rejected") {
        SolverConfig cfg;
        cfg.tau = 0.3;
        cfg.t_final = 1.0;  // not a multiple
        CHECK_THROWS(cfg.validate());
    }
}
