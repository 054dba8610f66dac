#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "acidfront/config.hpp"
#include "acidfront/io.hpp"

namespace fs = std::filesystem;
using namespace acidfront;

namespace {

std::string profile_desc(const InitialCondition& ic) {
    if (ic.kind == "gaussian-seed") {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "gaussian-seed(%.17g,%.17g,%.17g)", ic.center_x,
                      ic.center_y, ic.width_sq);
        return buf;
    }
    if (ic.kind == "uniform") {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "uniform(%.17g,%.17g,%.17g)", ic.center_x, ic.center_y,
                      ic.width_sq);
        return buf;
    }
    return ic.kind;
}

fs::path unique_run_dir(const fs::path& root, const std::string& prefix) {
    fs::create_directories(root);
    auto now = std::chrono::system_clock::now().time_since_epoch();
    auto us = std::chrono::duration_cast<std::chrono::microseconds>(now).count();
    for (int k = 0;; ++k) {
        fs::path dir = root / (prefix + "_" + std::to_string(us) + (k ? "_" + std::to_string(k) : ""));
        if (!fs::exists(dir)) return dir;
    }
}

int cmd_simulate(const RunConfig& cfg, const fs::path& out_root) {
    fs::path dir = unique_run_dir(out_root, "simulate");
    Trajectory traj = solve_direct(cfg.model, cfg.solver, cfg.profile,
                                   [](int level, int refines, double eta) {
                                       std::printf("step %4d  refines %2d  eta %.6g\n", level,
                                                   refines, eta);
                                   });
    write_trajectory(traj, cfg.model, cfg.solver, profile_desc(cfg.profile), dir);

    if (!cfg.time_workers.empty()) {
        Mesh mesh = make_uniform_mesh(cfg.solver.coarse_n);
        StateField state = initial_condition(mesh, cfg.profile);
        std::ofstream timing(dir / "reaction_timing.csv");
        timing << "workers,seconds\n";
        for (int w : cfg.time_workers) {
            auto t0 = std::chrono::steady_clock::now();
            reaction_step(mesh, state, cfg.model, cfg.solver.tau, cfg.solver.reaction_abs_tol,
                          cfg.solver.reaction_rel_tol, w);
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            timing << w << "," << secs << "\n";
            std::printf("reaction phase: %d worker(s) -> %.4f s\n", w, secs);
        }
    }
    std::printf("run written to %s (%d levels, %d warnings)\n", dir.string().c_str(),
                traj.num_levels(), traj.warnings);
    return 0;
}

int cmd_estimate(const RunConfig& cfg, const fs::path& data_path, const fs::path& out_root) {
    Trajectory data = read_trajectory(data_path);
    Mesh coarse = make_uniform_mesh(cfg.solver.coarse_n);
    if (data.coarse_mesh.num_nodes() != coarse.num_nodes() ||
        data.num_levels() != cfg.solver.num_steps() + 1) {
        std::fprintf(stderr, "error: data grid does not match the configured coarse grid\n");
        return 2;
    }

    EstimationProblem problem = make_problem(cfg);
    for (const auto& s : data.states) problem.data.push_back(s.u3);
    EstimationResult res = minimize(problem);

    std::printf("delta1* = %.6g   J = %.6g   J' = %.6g   (%d iterations, %d evaluations)\n",
                res.delta1_star, res.objective_value, res.gradient_value, res.iterations,
                res.evaluations);
    for (size_t i = 0; i < res.history.size(); ++i)
        std::printf("  it %2zu: delta1 = %.6g  J = %.6g  J' = %.6g\n", i, res.history[i].delta1,
                    res.history[i].objective, res.history[i].gradient);

    fs::path dir = unique_run_dir(out_root, "estimate");
    fs::create_directories(dir);
    std::ofstream csv(dir / "result.csv");
    csv << "iteration,delta1,objective,gradient\n";
    for (size_t i = 0; i < res.history.size(); ++i) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", i, res.history[i].delta1,
                      res.history[i].objective, res.history[i].gradient);
        csv << buf;
    }
    std::printf("result written to %s\n", dir.string().c_str());
    return 0;
}

int cmd_experiment(const RunConfig& cfg, const fs::path& out_root) {
    fs::path dir = unique_run_dir(out_root, "experiment");
    fs::create_directories(dir);
    std::ofstream csv(dir / "table.csv");
    csv << "true_delta1,sigma,n_runs,mean,std,rel_error,failures\n";

    EstimationProblem proto = make_problem(cfg);
    for (double truth : cfg.true_delta1_list) {
        for (double sigma : cfg.sigma_list) {
            RecoverySummary s;
            try {
                s = recovery_experiment(truth, sigma, cfg.n_runs, cfg.seed, proto);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "cell (%.4g, %.4g) failed: %s\n", truth, sigma, e.what());
                char buf[96];
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,nan,nan,nan,%d\n", truth, sigma,
                              cfg.n_runs, cfg.n_runs);
                csv << buf;
                continue;
            }
            char buf[200];
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%.17g,%.17g,%.17g,%d\n", truth, sigma,
                          s.n_runs, s.mean, s.std_dev, s.rel_error, s.failures);
            csv << buf;
            std::printf("delta1 = %-6.4g sigma = %-6.4g -> mean %.4f  std %.4f  rel err %.4f\n",
                        truth, sigma, s.mean, s.std_dev, s.rel_error);
        }
    }
    std::printf("table written to %s\n", (dir / "table.csv").string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tumor-invasion forward solver and acid-destruction parameter estimation"};
    app.require_subcommand(1);

    std::string config_path, out_dir, data_path;
    int workers = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("--config", config_path, "run configuration file (key = value)");
    app.add_option("--out", out_dir, "output root directory");
    app.add_option("--workers", workers, "worker thread count");
    app.add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; }, "base RNG seed");

    auto* sim = app.add_subcommand("simulate", "run the forward solver and dump the trajectory");
    auto* est = app.add_subcommand("estimate", "estimate delta1 from a recorded data trajectory");
    est->add_option("data", data_path, "trajectory directory produced by `simulate`")->required();
    auto* exp = app.add_subcommand("experiment", "recovery experiments over (delta1, sigma) grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 0;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        // precedence: --workers flag, then ACIDFRONT_WORKERS, then config file,
        // then available cores
        const char* env = std::getenv("ACIDFRONT_WORKERS");
        if (workers > 0)
            cfg.solver.workers = workers;
        else if (env)
            cfg.solver.workers = std::max(1, std::atoi(env));
        else if (cfg.solver.workers <= 0)
            cfg.solver.workers = std::max(1u, std::thread::hardware_concurrency());
        if (seed_set) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        cfg.validate();

        if (sim->parsed()) return cmd_simulate(cfg, cfg.out_dir);
        if (est->parsed()) return cmd_estimate(cfg, data_path, cfg.out_dir);
        if (exp->parsed()) return cmd_experiment(cfg, cfg.out_dir);
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
