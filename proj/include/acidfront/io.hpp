#pragma once

#include <filesystem>
#include <string>

#include "acidfront/fem.hpp"
#include "acidfront/forward.hpp"
#include "acidfront/mesh.hpp"

namespace acidfront {

/// Plain-text mesh format:
///   nodes <count> triangles <count>
///   x y                  (one node per line, 17 significant digits)
///   i j k                (one triangle per line, 0-based indices)
void write_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh read_mesh(const std::filesystem::path& path);

/// Field format: header `field <node-count>`, one value per line.
void write_field(const NodalField& field, const std::filesystem::path& path);
NodalField read_field(const std::filesystem::path& path);

/// One directory per run: coarse mesh, one field file per level per variable
/// (u1_0000.txt, ...), manifest, and a CSV summary
/// `t,u1_min,u1_max,u2_min,u2_max,u3_min,u3_max,eta_omega,refines`.
void write_trajectory(const Trajectory& traj, const ModelParams& params,
                      const SolverConfig& config, const std::string& profile_desc,
                      const std::filesystem::path& dir);
Trajectory read_trajectory(const std::filesystem::path& dir);

}  // namespace acidfront
