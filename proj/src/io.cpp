#include "acidfront/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace acidfront {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
    return is;
}

}  // namespace

void write_mesh(const Mesh& mesh, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << "nodes " << mesh.num_nodes() << " triangles " << mesh.num_triangles() << "\n";
    for (const auto& p : mesh.nodes) os << fmt17(p.x) << " " << fmt17(p.y) << "\n";
    for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
}

Mesh read_mesh(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::string kw1, kw2;
    int nn = 0, nt = 0;
    is >> kw1 >> nn >> kw2 >> nt;
    if (kw1 != "nodes" || kw2 != "triangles" || nn < 3 || nt < 1)
        throw std::runtime_error("malformed mesh file: " + path.string());
    Mesh m;
    m.nodes.resize(nn);
    for (auto& p : m.nodes) is >> p.x >> p.y;
    m.triangles.resize(nt);
    for (auto& t : m.triangles) is >> t[0] >> t[1] >> t[2];
    if (!is) throw std::runtime_error("truncated mesh file: " + path.string());
    m.build_connectivity();
    m.assign_longest_refinement_edges();
    return m;
}

void write_field(const NodalField& field, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << "field " << field.size() << "\n";
    for (Eigen::Index i = 0; i < field.size(); ++i) os << fmt17(field[i]) << "\n";
}

NodalField read_field(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::string kw;
    Eigen::Index n = 0;
    is >> kw >> n;
    if (kw != "field" || n < 1) throw std::runtime_error("malformed field file: " + path.string());
    NodalField f(n);
    for (Eigen::Index i = 0; i < n; ++i) is >> f[i];
    if (!is) throw std::runtime_error("truncated field file: " + path.string());
    return f;
}

namespace {

std::string level_name(const char* var, int level) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%04d.txt", var, level);
    return buf;
}

}  // namespace

void write_trajectory(const Trajectory& traj, const ModelParams& params,
                      const SolverConfig& config, const std::string& profile_desc,
                      const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_mesh(traj.coarse_mesh, dir / "mesh.txt");

    auto manifest = open_out(dir / "manifest.txt");
    manifest << "levels = " << traj.num_levels() << "\n"
             << "tau = " << fmt17(config.tau) << "\n"
             << "t_final = " << fmt17(config.t_final) << "\n"
             << "delta1 = " << fmt17(params.delta1) << "\n"
             << "rho2 = " << fmt17(params.rho2) << "\n"
             << "d2 = " << fmt17(params.d2) << "\n"
             << "delta3 = " << fmt17(params.delta3) << "\n"
             << "profile = " << profile_desc << "\n"
             << "warnings = " << traj.warnings << "\n";
    manifest << "refines_per_step =";
    for (int r : traj.refines_per_step) manifest << " " << r;
    manifest << "\n";

    for (int level = 0; level < traj.num_levels(); ++level) {
        write_field(traj.states[level].u1, dir / level_name("u1", level));
        write_field(traj.states[level].u2, dir / level_name("u2", level));
        write_field(traj.states[level].u3, dir / level_name("u3", level));
    }

    auto csv = open_out(dir / "summary.csv");
    csv << "t,u1_min,u1_max,u2_min,u2_max,u3_min,u3_max,eta_omega,refines\n";
    for (int level = 0; level < traj.num_levels(); ++level) {
        const auto& s = traj.states[level];
        csv << fmt17(traj.times[level]) << "," << s.u1.minCoeff() << "," << s.u1.maxCoeff() << ","
            << s.u2.minCoeff() << "," << s.u2.maxCoeff() << "," << s.u3.minCoeff() << ","
            << s.u3.maxCoeff() << ",";
        if (level == 0)
            csv << "0,0\n";
        else
            csv << traj.eta_per_step[level - 1] << "," << traj.refines_per_step[level - 1] << "\n";
    }
}

Trajectory read_trajectory(const std::filesystem::path& dir) {
    Trajectory traj;
    traj.coarse_mesh = read_mesh(dir / "mesh.txt");

    auto is = open_in(dir / "manifest.txt");
    int levels = 0;
    double tau = 0.0;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string key, eq;
        ls >> key >> eq;
        if (key == "levels") ls >> levels;
        if (key == "tau") ls >> tau;
    }
    if (levels < 1 || tau <= 0.0)
        throw std::runtime_error("malformed manifest in " + dir.string());

    for (int level = 0; level < levels; ++level) {
        StateField s;
        s.u1 = read_field(dir / level_name("u1", level));
        s.u2 = read_field(dir / level_name("u2", level));
        s.u3 = read_field(dir / level_name("u3", level));
        if (s.u1.size() != traj.coarse_mesh.num_nodes())
            throw std::runtime_error("trajectory field does not match mesh in " + dir.string());
        s.time = level * tau;
        traj.states.push_back(std::move(s));
        traj.times.push_back(level * tau);
    }
    return traj;
}

}  // namespace acidfront
