#pragma once

#include "pbern/grid.hpp"

namespace pbern {

struct PLaplaceConfig {
    double p = 2.0;
    // Gradient regularization: edge coefficients use (|grad u|^2 + eps_reg^2)^((p-2)/2).
    double eps_reg = 1e-6;
    // Picard stop: residual infinity norm below this. <= 0 selects an automatic
    // tolerance tied to the linear solver floor, max(1e-8, 500*linear_tol*range/h^2).
    double picard_tol = 0.0;
    int picard_max = 200;
    // Relative residual target of the inner SGS-preconditioned CG solve.
    double linear_tol = 1e-12;
    int linear_max = 0; // 0: automatic cap from the grid size
    double damping = 1.0;
};

struct SolveInfo {
    int picard_iterations = 0;
    double residual = 0.0;
    double effective_tol = 0.0;
};

// Discrete solution of div((|grad u|^2 + eps^2)^((p-2)/2) grad u) = 0 on the
// annulus of the mask, edge-flux finite volumes on the 4-neighbor stencil,
// lagged-coefficient (Picard) outer iteration with damped updates. Throws
// NonConvergence with the last residual if picard_max is exceeded.
ScalarField solve_p_capacitary(const RegionMask& mask, const PLaplaceConfig& cfg,
                               const ScalarField* warm_start = nullptr,
                               SolveInfo* info = nullptr);

// |grad u| by central differences, one-sided at the grid border.
ScalarField gradient_magnitude(const ScalarField& field);

// Infinity norm of the discrete p-Laplacian divergence over ANNULUS nodes.
double nonlinear_residual(const ScalarField& field, const RegionMask& mask, double p,
                          double eps_reg = 0.0);

} // namespace pbern
