#pragma once

#include <optional>

#include "pbern/errors.hpp"

namespace pbern {

// Annulus B_R \ B_r in R^N with Dirichlet values v_in on |x|=r and v_out on
// |x|=R. The p-capacitary potential is affine in log|x| when p = N and in
// |x|^beta, beta = (p-N)/(p-1), otherwise; the two branches switch at
// |p - N| < 1e-9 where the power form is numerically singular.
struct RadialProblem {
    double p = 2.0;
    int N = 2;
    double r = 0.0;
    double R = 0.0;
    double l = 0.5;
    double v_in = 1.0;
    double v_out = 0.0;

    RadialProblem(double p_, int N_, double r_, double R_, double l_,
                  double v_in_ = 1.0, double v_out_ = 0.0);
};

// Potential value at radius rho in [r, R].
double radial_potential(const RadialProblem& prob, double rho);

// Radius of the level set {u = l}.
double level_radius(const RadialProblem& prob);

// Interior gap function Lambda(r): distance from |x|=r to the l-level set of
// the potential of B_R \ B_r with u=0 on the inner sphere and u=1 on |x|=R.
//   p = N:  Lambda(r) = R^l r^(1-l) - r
//   p != N: Lambda(r) = ((1-l) r^beta + l R^beta)^(1/beta) - r
// The r -> 0 limit is handled explicitly: 0 for p <= N and
// l^((p-1)/(p-N)) R for p > N.
double interior_gap(const RadialProblem& prob, double r);

struct InteriorExtremum {
    double r_max;
    double lambda_max;
    double lambda_min; // Lambda(0); zero for p <= N
};

// Argmax and extreme values of Lambda on (0, R).
InteriorExtremum interior_extremum(const RadialProblem& prob);

struct InteriorRadii {
    std::optional<double> r1; // hyperbolic branch; absent for p > N, lambda < lambda_min
    double r2;                // elliptic branch
};

// The two roots of Lambda(r) = lambda, by bisection on the monotone branches.
// Throws LambdaTooLarge when lambda > lambda_max.
InteriorRadii solve_interior_radii(const RadialProblem& prob, double lambda);

// Unique R* > r with R* - rho_l(R*) = lambda for the exterior orientation
// (u=1 on |x|=r, u=0 on |x|=R*); the gap grows monotonically from 0 to
// infinity in R, so bisection always succeeds.
double solve_exterior_radius(double p, int N, double r, double l, double lambda);

// lim_{l->0} l / lambda_max(l): e/R for p = N and
// (1/R) ((p-1)/(N-1))^((N-1)/(p-N)) otherwise.
double bernoulli_limit(double p, int N, double R);

} // namespace pbern
