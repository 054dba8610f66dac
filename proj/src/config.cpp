#include "acidfront/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace acidfront {

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& v) {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("config: bad number for '" + key + "': " + v);
    return d;
}

int to_int(const std::string& key, const std::string& v) {
    size_t pos = 0;
    int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("config: bad integer for '" + key + "': " + v);
    return i;
}

}  // namespace

void RunConfig::validate() const {
    solver.validate();
    if (!(delta1_lo >= 0.0 && delta1_lo < delta1_hi))
        throw std::invalid_argument("config: require 0 <= delta1_lo < delta1_hi");
    if (delta1_init < delta1_lo || delta1_init > delta1_hi)
        throw std::invalid_argument("config: delta1_init outside [delta1_lo, delta1_hi]");
    if (n_runs < 1) throw std::invalid_argument("config: n_runs must be >= 1");
    if (eval_cap < 1) throw std::invalid_argument("config: eval_cap must be >= 1");
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));

        if (key == "tau") cfg.solver.tau = to_double(key, val);
        else if (key == "t_final") cfg.solver.t_final = to_double(key, val);
        else if (key == "eps_tol") cfg.solver.eps_tol = to_double(key, val);
        else if (key == "theta") cfg.solver.theta = to_double(key, val);
        else if (key == "reaction_abs_tol") cfg.solver.reaction_abs_tol = to_double(key, val);
        else if (key == "reaction_rel_tol") cfg.solver.reaction_rel_tol = to_double(key, val);
        else if (key == "max_refines_per_step") cfg.solver.max_refines_per_step = to_int(key, val);
        else if (key == "cg_tol") cfg.solver.cg_tol = to_double(key, val);
        else if (key == "coarse_n") cfg.solver.coarse_n = to_int(key, val);
        else if (key == "workers") cfg.solver.workers = to_int(key, val);
        else if (key == "positivity_cutoff") cfg.solver.positivity_cutoff = to_int(key, val) != 0;
        else if (key == "delta1") cfg.model.delta1 = to_double(key, val);
        else if (key == "rho2") cfg.model.rho2 = to_double(key, val);
        else if (key == "d2") cfg.model.d2 = to_double(key, val);
        else if (key == "delta3") cfg.model.delta3 = to_double(key, val);
        else if (key == "profile") cfg.profile.kind = val;
        else if (key == "profile_center_x") cfg.profile.center_x = to_double(key, val);
        else if (key == "profile_center_y") cfg.profile.center_y = to_double(key, val);
        else if (key == "profile_width_sq") cfg.profile.width_sq = to_double(key, val);
        else if (key == "profile_file_u1") cfg.profile.file_u1 = val;
        else if (key == "profile_file_u2") cfg.profile.file_u2 = val;
        else if (key == "profile_file_u3") cfg.profile.file_u3 = val;
        else if (key == "delta1_lo") cfg.delta1_lo = to_double(key, val);
        else if (key == "delta1_hi") cfg.delta1_hi = to_double(key, val);
        else if (key == "delta1_init") cfg.delta1_init = to_double(key, val);
        else if (key == "eval_cap") cfg.eval_cap = to_int(key, val);
        else if (key == "gtol_rel") cfg.gtol_rel = to_double(key, val);
        else if (key == "n_runs") cfg.n_runs = to_int(key, val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "out_dir") cfg.out_dir = val;
        else if (key == "true_delta1_list") {
            cfg.true_delta1_list.clear();
            for (const auto& v : split_commas(val)) cfg.true_delta1_list.push_back(to_double(key, v));
        } else if (key == "sigma_list") {
            cfg.sigma_list.clear();
            for (const auto& v : split_commas(val)) cfg.sigma_list.push_back(to_double(key, v));
        } else if (key == "time_workers") {
            cfg.time_workers.clear();
            for (const auto& v : split_commas(val)) cfg.time_workers.push_back(to_int(key, v));
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "tau = " << fmt17(cfg.solver.tau) << "\n"
       << "t_final = " << fmt17(cfg.solver.t_final) << "\n"
       << "eps_tol = " << fmt17(cfg.solver.eps_tol) << "\n"
       << "theta = " << fmt17(cfg.solver.theta) << "\n"
       << "reaction_abs_tol = " << fmt17(cfg.solver.reaction_abs_tol) << "\n"
       << "reaction_rel_tol = " << fmt17(cfg.solver.reaction_rel_tol) << "\n"
       << "max_refines_per_step = " << cfg.solver.max_refines_per_step << "\n"
       << "cg_tol = " << fmt17(cfg.solver.cg_tol) << "\n"
       << "coarse_n = " << cfg.solver.coarse_n << "\n"
       << "workers = " << cfg.solver.workers << "\n"
       << "positivity_cutoff = " << (cfg.solver.positivity_cutoff ? 1 : 0) << "\n"
       << "delta1 = " << fmt17(cfg.model.delta1) << "\n"
       << "rho2 = " << fmt17(cfg.model.rho2) << "\n"
       << "d2 = " << fmt17(cfg.model.d2) << "\n"
       << "delta3 = " << fmt17(cfg.model.delta3) << "\n"
       << "profile = " << cfg.profile.kind << "\n"
       << "profile_center_x = " << fmt17(cfg.profile.center_x) << "\n"
       << "profile_center_y = " << fmt17(cfg.profile.center_y) << "\n"
       << "profile_width_sq = " << fmt17(cfg.profile.width_sq) << "\n";
    if (!cfg.profile.file_u1.empty()) os << "profile_file_u1 = " << cfg.profile.file_u1 << "\n";
    if (!cfg.profile.file_u2.empty()) os << "profile_file_u2 = " << cfg.profile.file_u2 << "\n";
    if (!cfg.profile.file_u3.empty()) os << "profile_file_u3 = " << cfg.profile.file_u3 << "\n";
    os << "delta1_lo = " << fmt17(cfg.delta1_lo) << "\n"
       << "delta1_hi = " << fmt17(cfg.delta1_hi) << "\n"
       << "delta1_init = " << fmt17(cfg.delta1_init) << "\n"
       << "eval_cap = " << cfg.eval_cap << "\n"
       << "gtol_rel = " << fmt17(cfg.gtol_rel) << "\n";
    os << "true_delta1_list = ";
    for (size_t i = 0; i < cfg.true_delta1_list.size(); ++i)
        os << (i ? "," : "") << fmt17(cfg.true_delta1_list[i]);
    os << "\nsigma_list = ";
    for (size_t i = 0; i < cfg.sigma_list.size(); ++i)
        os << (i ? "," : "") << fmt17(cfg.sigma_list[i]);
    os << "\n";
    if (!cfg.time_workers.empty()) {
        os << "time_workers = ";
        for (size_t i = 0; i < cfg.time_workers.size(); ++i)
            os << (i ? "," : "") << cfg.time_workers[i];
        os << "\n";
    }
    os << "n_runs = " << cfg.n_runs << "\n"
       << "seed = " << cfg.seed << "\n"
       << "out_dir = " << cfg.out_dir << "\n";
    return os.str();
}

EstimationProblem make_problem(const RunConfig& cfg) {
    EstimationProblem p;
    p.rho2 = cfg.model.rho2;
    p.d2 = cfg.model.d2;
    p.delta3 = cfg.model.delta3;
    p.lo = cfg.delta1_lo;
    p.hi = cfg.delta1_hi;
    p.delta1_init = cfg.delta1_init;
    p.config = cfg.solver;
    p.ic = cfg.profile;
    p.eval_cap = cfg.eval_cap;
    p.gtol_rel = cfg.gtol_rel;
    return p;
}

}  // namespace acidfront
