#pragma once

#include "pbern/freeboundary.hpp"
#include "pbern/radial.hpp"

namespace pbern {

struct BernoulliStep {
    int n = 0;
    double lambda = 0.0;
    double l = 0.0;
    double ghat = 0.0;          // median |grad u| sampled one stencil inside the boundary
    double hausdorff_prev = 0.0; // Hausdorff distance to the previous boundary
    double max_outside = 0.0;    // largest excursion outside the previous boundary
    ConvexPolygon boundary;
};

struct BernoulliReport {
    std::vector<BernoulliStep> steps;
    int truncated = 0; // steps dropped because lambda_n < 2h
};

// Exterior solves for lambda_n = lambda0 * 2^-n with l_n = omega * lambda_n,
// each warm-started from the previous boundary; reports the near-boundary
// gradient statistic and the nesting diagnostics.
BernoulliReport run_converge_bernoulli(const ConvexPolygon& K, double omega, double lambda0,
                                       int n_steps, const FreeBoundaryConfig& cfg);

struct BrunnMinkowskiRow {
    double t = 0.0;
    double lambda_hat = 0.0;        // estimated Bernoulli constant of Omega_t
    double deficit = 0.0;           // lambda_hat - [(1-t) lambda_hat_0 + t lambda_hat_1]
    double inclusion_margin = 0.0;  // margin of (1-t)K0 + tK1 inside K_t
};

struct BrunnMinkowskiReport {
    double lambda_hat0 = 0.0, lambda_hat1 = 0.0;
    double lambda0_used = 0.0, lambda1_used = 0.0;
    std::vector<BrunnMinkowskiRow> rows;
};

// For each t builds Omega_t = (1-t)Omega0 + tOmega1, estimates its Bernoulli
// constant and solves the interior problem at lambda_t = (1-t)lambda0 +
// t*lambda1, reporting the Brunn-Minkowski deficit and the inclusion margin
// of the Minkowski combination of the end interfaces inside K_t. The grid of
// cfg is re-fitted per body; lambda0/lambda1 <= 0 select 0.8 * lambda_hat.
BrunnMinkowskiReport run_brunn_minkowski(const ConvexPolygon& Omega0, const ConvexPolygon& Omega1,
                                         double l, double p, const std::vector<double>& t_grid,
                                         const FreeBoundaryConfig& cfg, double lambda0 = 0.0,
                                         double lambda1 = 0.0);

} // namespace pbern
