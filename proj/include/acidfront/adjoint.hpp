#pragma once

#include <array>
#include <vector>

#include "acidfront/forward.hpp"

namespace acidfront {

/// Backward-in-time adjoint solution on the coarse mesh; the final level is
/// identically zero. terminal_misfit keeps u3 - data at the final level so
/// that the trapezoid half-weight at T can be reapplied when the gradient is
/// evaluated (empty means zero).
struct AdjointTrajectory {
    Mesh coarse_mesh;
    std::vector<double> times;
    std::vector<std::array<NodalField, 3>> lambdas;  // (lambda1, lambda2, lambda3) per level
    NodalField terminal_misfit;
    ModelParams params;  // parameters the march was run with
};

/// One backward step of the discrete adjoint of the split forward scheme:
/// transposed semi-implicit diffusion solves (coefficients from the
/// post-step state), the transposed variational flow of the node-wise
/// reaction ODEs, then the misfit source weight * tau * (u3 - data_u3) at
/// t_{n-1}.  Being the exact transpose of the forward step keeps the reduced
/// gradient consistent with finite differences of the discrete objective.
std::array<NodalField, 3> adjoint_step(const Mesh& mesh,
                                       const std::array<NodalField, 3>& lambda_next,
                                       const StateField& state_prev,
                                       const StateField& state_next,
                                       const NodalField& data_u3, const ModelParams& params,
                                       double tau, double misfit_weight = 1.0);

/// Full backward march from lambda^N = 0; data holds hat{u}_3 per level on
/// the trajectory's grid.  The misfit sources carry the objective's
/// trapezoid weights (one half at both time endpoints).
AdjointTrajectory solve_adjoint(const Trajectory& trajectory,
                                const std::vector<NodalField>& data_u3,
                                const ModelParams& params);

/// Reduced gradient J'(delta1): per time step, the stored multipliers are
/// transported through the transposed diffusion solve and paired with the
/// delta1-sensitivity of the reaction flow (the discrete realization of the
/// integral of u1 u3 lambda1).
double reduced_gradient(const Trajectory& trajectory, const AdjointTrajectory& adjoint);

/// Misfit objective J = 1/2 integral (u3 - data)^2, trapezoid in time.
double objective(const Trajectory& trajectory, const std::vector<NodalField>& data_u3);

}  // namespace acidfront
