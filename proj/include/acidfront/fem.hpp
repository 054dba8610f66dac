#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "acidfront/mesh.hpp"

namespace acidfront {

using SparseMatrix = Eigen::SparseMatrix<double>;
using NodalField = Eigen::VectorXd;

/// Consistent P1 mass matrix. SPD; entries sum to |Omega| = 1.
SparseMatrix assemble_mass(const Mesh& mesh);

/// Weighted P1 mass matrix, coefficient taken as the elementwise mean of the
/// nodal values.
SparseMatrix assemble_weighted_mass(const Mesh& mesh, const NodalField& coeff);

/// P1 stiffness matrix with elementwise-mean coefficient, clamped at zero per
/// element. Symmetric positive semidefinite; row sums vanish (pure Neumann).
SparseMatrix assemble_stiffness(const Mesh& mesh, const NodalField& coeff);
SparseMatrix assemble_stiffness_unit(const Mesh& mesh);

/// Conjugate gradients with diagonal preconditioning for SPD systems.
/// Throws if the relative residual does not reach tol within the iteration
/// cap (10 x dimension by default, overridable).
NodalField solve_spd(const SparseMatrix& A, const NodalField& b, double tol,
                     int max_iter = -1);

/// Evaluates the P1 interpolant of `field` (living on `from`) at every node
/// of `to`. Point location walks the source triangulation and falls back to
/// an exhaustive scan; a target node farther than 1e-10 outside every source
/// triangle is an error.
NodalField transfer(const NodalField& field, const Mesh& from, const Mesh& to);

}  // namespace acidfront
