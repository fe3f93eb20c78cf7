#pragma once

#include <functional>
#include <optional>

#include "pbern/pde.hpp"

namespace pbern {

// Level l and distance constraint of the free boundary condition
// dist(x, {u=l}) = lambda(x). lambda is either a positive constant or a
// positive bounded function of position with declared bounds c0 <= lambda <= c1.
// When omega is set, l was derived as l = omega * lambda (Bernoulli-limit mode).
struct DistanceSpec {
    double l = 0.5;
    double lambda_const = 0.0;
    bool variable = false;
    std::function<double(Vec2)> lambda_fn;
    double c0 = 0.0;
    double c1 = 0.0;
    std::optional<double> omega;

    static DistanceSpec constant(double l, double lambda);
    static DistanceSpec function(double l, std::function<double(Vec2)> fn, double c0, double c1);
    // l = omega * lambda preset.
    static DistanceSpec bernoulli(double omega, double lambda);

    double lambda_at(Vec2 x) const { return variable ? lambda_fn(x) : lambda_const; }
    double lambda_lo() const { return variable ? c0 : lambda_const; }
    double lambda_hi() const { return variable ? c1 : lambda_const; }
};

struct FreeBoundaryConfig {
    Grid2D grid;
    PLaplaceConfig pde;
    // Hausdorff stopping threshold; <= 0 selects 1.5h. Must be >= h.
    double outer_tol = 0.0;
    int outer_max = 200;
    bool convexify = true;

    double effective_outer_tol() const;
};

struct IterationRecord {
    double hausdorff_step = 0.0;
    double condition_residual = 0.0;
    double pde_residual = 0.0;
    int annulus_nodes = 0;
};

struct IterationTrace {
    std::vector<IterationRecord> rows;
    // The updated boundary of each iteration, aligned with rows.
    std::vector<ConvexPolygon> boundaries;
    bool converged = false;
};

struct FreeBoundaryResult {
    ScalarField field;
    ConvexPolygon boundary; // the unknown boundary: outer for (P_E), inner for (P_I)
    IterationTrace trace;
};

// Fixed-point iteration for the exterior problem: solve the capacitary
// potential on omega_{n-1} \ K (u=1 on K, u=0 outside), then
//   omega_n := {u >= l} union {x : dist(x, {u=l}) <= lambda(x)},
// trace the outer boundary of that set (convex hull when convexify is on) and
// stop when the Hausdorff step drops below outer_tol. omega0 should contain K
// strictly; starting from a supersolution gives a decreasing sequence.
FreeBoundaryResult iterate_exterior(const ConvexPolygon& K, const DistanceSpec& spec,
                                    const FreeBoundaryConfig& cfg, const ConvexPolygon& omega0);

// Interior analogue targeting the maximal (elliptic) solution. Starts from
// K_0 = {x : dist(x, boundary of Omega) >= lambda} and contracts via
//   K_n := hull{x : u <= l and dist(x, {u=l}) >= lambda}
// with u the potential of Omega \ K_{n-1} (u=0 on K, u=1 on boundary).
// Throws LambdaTooLarge when the iterate collapses (lambda beyond the
// Bernoulli constant of Omega). Constant-lambda mode only.
FreeBoundaryResult iterate_interior(const ConvexPolygon& Omega, const DistanceSpec& spec,
                                    const FreeBoundaryConfig& cfg);

struct ConditionSample {
    Vec2 x;
    double dist = 0.0;
    double lambda = 0.0;
    double residual = 0.0;
};

struct ConditionReport {
    double max_residual = 0.0;
    std::vector<ConditionSample> samples;
};

// Samples the boundary at pitch h/2 and evaluates |dist(x,{u=l}) - lambda(x)|
// per sample against the level curve of the given field.
ConditionReport check_distance_condition(const ScalarField& field, const ConvexPolygon& boundary,
                                         const DistanceSpec& spec);

// Bernoulli constant of Omega: bisection over lambda on the success/failure
// of iterate_interior, bracket seeded by the radial lambda_max of the
// inscribed and enclosing balls; returns the bracket midpoint once its width
// is below 2h.
double estimate_lambda_max(const ConvexPolygon& Omega, double l, double p,
                           const FreeBoundaryConfig& cfg);

// Joining function g of the two-phase condition
// dist(x,{u1=l}) = g(x, dist(x,{u2=-l})). Positive and continuous; declared
// growth bounds c1 <= g(x,q)/q <= c2 for q >= q0 are carried as metadata.
// Monotonicity in q, growth and concavity hypotheses stay user obligations
// and are not enforced (the builtin classic example is decreasing in q).
struct JoiningFunction {
    std::function<double(Vec2, double)> g;
    double c1 = 0.0, c2 = 0.0, q0 = 0.0;

    static JoiningFunction symmetric(); // g(x,q) = q
    // g(x,q) = (a(x)^alpha + q^alpha)^(-1/alpha)
    static JoiningFunction classic(std::function<double(Vec2)> a, double alpha);

    // Spot-checks positivity on a probe lattice.
    void validate_probes(const BBox& box) const;
};

struct TwoPhaseResult {
    ConvexPolygon interface; // K2
    ScalarField field_inner; // u1 on K2 \ K1 (1 / 0)
    ScalarField field_outer; // u2 on K3 \ K2 (0 / -1)
    IterationTrace trace;    // condition_residual column carries max |G|
    double separation_ratio = 0.0; // dist(dK1,dK2) / dist(dK1,dK3)
};

// Two-phase solver: K2 initialized from a deep sublevel set of the full
// capacitary potential of K3 \ K1, then each boundary vertex moves along the
// inward normal by clamp(eta * G(x), -h, h) where
// G(x) = dist(x,{u1=l}) - g(x, dist(x,{u2=-l})); G > 0 marks a local strict
// supersolution, so positive steps shrink toward the minimal set. Stops when
// max |G| < 3h.
TwoPhaseResult two_phase_iterate(const ConvexPolygon& K1, const ConvexPolygon& K3,
                                 const JoiningFunction& g, double l, double p,
                                 const FreeBoundaryConfig& cfg);

} // namespace pbern
