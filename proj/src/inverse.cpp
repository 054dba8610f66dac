#include "acidfront/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "acidfront/rng.hpp"

namespace acidfront {

void EstimationProblem::validate() const {
    if (!(lo >= 0.0 && lo < hi)) throw std::invalid_argument("problem: bounds must satisfy 0 <= lo < hi");
    if (delta1_init < lo || delta1_init > hi)
        throw std::invalid_argument("problem: delta1_init outside the admissible interval");
    if (data.empty()) throw std::invalid_argument("problem: no data");
    config.validate();
}

namespace {

struct Evaluation {
    double objective;
    double gradient;
};

Evaluation evaluate(const EstimationProblem& p, double delta1, int& evals) {
    ModelParams params{delta1, p.rho2, p.d2, p.delta3};
    Trajectory traj;
    try {
        traj = solve_direct(params, p.config, p.ic);
    } catch (const std::exception& e) {
        throw std::runtime_error("forward solve failed at delta1 = " + std::to_string(delta1) +
                                 ": " + e.what());
    }
    ++evals;
    double j = objective(traj, p.data);
    AdjointTrajectory adj = solve_adjoint(traj, p.data, params);
    double g = reduced_gradient(traj, adj);
    return {j, g};
}

}  // namespace

EstimationResult minimize(const EstimationProblem& problem) {
    problem.validate();
    const double lo = problem.lo, hi = problem.hi;
    auto clamp = [&](double x) { return std::clamp(x, lo, hi); };
    auto projected_gradient = [&](double x, double g) {
        if (x <= lo && g > 0.0) return 0.0;
        if (x >= hi && g < 0.0) return 0.0;
        return g;
    };

    EstimationResult res;
    double x = clamp(problem.delta1_init);
    Evaluation cur = evaluate(problem, x, res.evaluations);
    res.history.push_back({x, cur.objective, cur.gradient});

    const double gtol = problem.gtol_rel * std::max(1.0, std::abs(cur.gradient));
    double x_prev = x, g_prev = cur.gradient;
    bool have_secant = false;

    while (res.evaluations < problem.eval_cap) {
        double pg = projected_gradient(x, cur.gradient);
        if (std::abs(pg) <= gtol) break;

        // secant curvature, safeguarded against non-convex or stale estimates
        double fallback = std::abs(cur.gradient) / (0.1 * (hi - lo));
        double curvature = fallback;
        if (have_secant && x != x_prev) {
            double b = (cur.gradient - g_prev) / (x - x_prev);
            if (std::isfinite(b) && b > 1e-14) curvature = b;
        }
        double direction = -cur.gradient / curvature;

        double step = 1.0;
        bool accepted = false;
        double xn = x;
        Evaluation next{};
        while (res.evaluations < problem.eval_cap) {
            xn = clamp(x + step * direction);
            if (std::abs(xn - x) < 1e-10) break;
            next = evaluate(problem, xn, res.evaluations);
            if (next.objective <= cur.objective + 1e-4 * cur.gradient * (xn - x)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        x_prev = x;
        g_prev = cur.gradient;
        have_secant = true;
        x = xn;
        cur = next;
        ++res.iterations;
        res.history.push_back({x, cur.objective, cur.gradient});
    }

    res.delta1_star = x;
    res.objective_value = cur.objective;
    res.gradient_value = cur.gradient;
    return res;
}

std::vector<NodalField> add_noise(const std::vector<NodalField>& data, double sigma,
                                  std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be nonnegative");
    if (sigma == 0.0) return data;
    SplitMix64 rng(seed);
    std::vector<NodalField> out = data;
    for (auto& level : out)
        for (Eigen::Index i = 0; i < level.size(); ++i) level[i] += sigma * rng.next_normal();
    return out;
}

ModelParams nondimensionalize(double d1, double r1, double r2, double r3, double d3, double K2,
                              double DN2, double DN3) {
    if (r1 <= 0.0 || d3 <= 0.0 || DN3 <= 0.0)
        throw std::invalid_argument("nondimensionalize: r1, d3, DN3 must be positive");
    return {d1 * r3 * K2 / (d3 * r1), r2 / r1, DN2 / DN3, d3 / r1};
}

RecoverySummary recovery_experiment(double true_delta1, double sigma, int n_runs,
                                    std::uint64_t seed, const EstimationProblem& proto) {
    if (n_runs < 1) throw std::invalid_argument("recovery_experiment: n_runs must be >= 1");

    ModelParams truth{true_delta1, proto.rho2, proto.d2, proto.delta3};
    Trajectory traj = solve_direct(truth, proto.config, proto.ic);
    std::vector<NodalField> clean;
    clean.reserve(traj.num_levels());
    for (const auto& s : traj.states) clean.push_back(s.u3);

    RecoverySummary sum;
    sum.true_delta1 = true_delta1;
    sum.sigma = sigma;
    sum.n_runs = n_runs;
    for (int run = 0; run < n_runs; ++run) {
        EstimationProblem p = proto;
        p.data = add_noise(clean, sigma, SplitMix64::mix(seed, static_cast<std::uint64_t>(run)));
        try {
            sum.estimates.push_back(minimize(p).delta1_star);
        } catch (const std::exception&) {
            ++sum.failures;
        }
    }

    const int n = static_cast<int>(sum.estimates.size());
    if (n > 0) {
        double mean = 0.0;
        for (double v : sum.estimates) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : sum.estimates) var += (v - mean) * (v - mean);
        sum.mean = mean;
        sum.std_dev = (n > 1) ? std::sqrt(var / (n - 1)) : 0.0;
        sum.rel_error = (true_delta1 != 0.0) ? std::abs(mean - true_delta1) / true_delta1
                                             : std::abs(mean);
    }
    return sum;
}

}  // namespace acidfront
