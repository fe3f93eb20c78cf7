#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "pbern/experiments.hpp"
#include "pbern/freeboundary.hpp"
#include "pbern/radial.hpp"

using namespace pbern;

namespace {

constexpr double kH = 1.0 / 64.0;

FreeBoundaryConfig disk_cfg(double extent, double p = 2.0, double h = kH) {
    FreeBoundaryConfig cfg;
    cfg.grid = make_grid(BBox{{-extent, -extent}, {extent, extent}}, h, 4 * h);
    cfg.pde.p = p;
    return cfg;
}

double max_radius_deviation(const ConvexPolygon& poly, double target) {
    double worst = 0.0;
    for (Vec2 v : poly.vertices()) worst = std::max(worst, std::abs(std::hypot(v.x, v.y) - target));
    return worst;
}

// 1D radial shooting oracle for the two-phase interface: the annulus radius s
// where the inner level gap matches g of the outer level gap, both sides from
// the radial closed forms.
double two_phase_oracle(double r1, double R3, double l, double p,
                        const std::function<double(double)>& g) {
    double lo = r1 * 1.02, hi = R3 * 0.98;
    const auto G = [&](double s) {
        const double d1 = s - level_radius(RadialProblem(p, 2, r1, s, l, 1.0, 0.0));
        const double d2 = level_radius(RadialProblem(p, 2, s, R3, -l, 0.0, -1.0)) - s;
        return d1 - g(d2);
    };
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (G(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("exterior iteration lands on the radial oracle circle") {
    const ConvexPolygon K = make_disk({0, 0}, 0.3);
    const FreeBoundaryConfig cfg = disk_cfg(1.45);
    const DistanceSpec spec = DistanceSpec::constant(0.4, 0.2);
    const FreeBoundaryResult res = iterate_exterior(K, spec, cfg, make_disk({0, 0}, 1.2));
    CHECK(res.trace.converged);

    const double Rstar = solve_exterior_radius(2, 2, 0.3, 0.4, 0.2);
    CHECK(max_radius_deviation(res.boundary, Rstar) <= 3.0 * kH);
    CHECK(check_distance_condition(res.field, res.boundary, spec).max_residual <= 3.0 * kH);
}

TEST_CASE("seeding with the radial solution is a near fixed point") {
    const ConvexPolygon K = make_disk({0, 0}, 0.3);
    const FreeBoundaryConfig cfg = disk_cfg(1.0);
    const DistanceSpec spec = DistanceSpec::constant(0.4, 0.2);
    const double Rstar = solve_exterior_radius(2, 2, 0.3, 0.4, 0.2);
    const FreeBoundaryResult res = iterate_exterior(K, spec, cfg, make_disk({0, 0}, Rstar, 128));
    REQUIRE(!res.trace.rows.empty());
    CHECK(res.trace.rows.front().hausdorff_step < 2.0 * kH);
}

TEST_CASE("starting from a strict supersolution shrinks monotonically") {
    const ConvexPolygon K = make_disk({0, 0}, 0.3);
    const FreeBoundaryConfig cfg = disk_cfg(1.3);
    const DistanceSpec spec = DistanceSpec::constant(0.4, 0.2);
    const double R0 = solve_exterior_radius(2, 2, 0.3, 0.4, 1.5 * 0.2);
    const ConvexPolygon omega0 = make_disk({0, 0}, R0, 128);
    const FreeBoundaryResult res = iterate_exterior(K, spec, cfg, omega0);

    const ConvexPolygon* prev = &omega0;
    for (const ConvexPolygon& bnd : res.trace.boundaries) {
        double outside = 0.0;
        for (Vec2 x : bnd.sample_boundary(kH / 4.0))
            outside = std::max(outside, -prev->signed_boundary_distance(x));
        CHECK(outside <= kH);
        prev = &bnd;
    }
    CHECK(res.trace.boundaries.size() >= 2);
}

TEST_CASE("square inner body: converged boundary is convex and self-consistent") {
    const ConvexPolygon K({{-0.25, -0.25}, {0.25, -0.25}, {0.25, 0.25}, {-0.25, 0.25}});
    const FreeBoundaryConfig cfg = disk_cfg(1.1);
    const DistanceSpec spec = DistanceSpec::constant(0.3, 0.15);
    const double R0 = solve_exterior_radius(2, 2, 0.25 * std::sqrt(2.0), 0.3, 1.5 * 0.15);
    const FreeBoundaryResult res = iterate_exterior(K, spec, cfg, make_disk({0, 0}, R0, 128));
    CHECK(res.trace.converged);
    // Convexity holds by the ConvexPolygon invariant; the distance condition
    // is the self-consistency check.
    CHECK(check_distance_condition(res.field, res.boundary, spec).max_residual <= 3.0 * kH);
}

TEST_CASE("lambda below 2h raises GridTooCoarse") {
    const ConvexPolygon K = make_disk({0, 0}, 0.3);
    const FreeBoundaryConfig cfg = disk_cfg(1.2);
    CHECK_THROWS_AS(
        iterate_exterior(K, DistanceSpec::constant(0.4, 1.5 * kH), cfg, make_disk({0, 0}, 1.0)),
        GridTooCoarse);
    CHECK_THROWS_AS(
        iterate_interior(make_disk({0, 0}, 1.0), DistanceSpec::constant(0.5, 1.5 * kH), cfg),
        GridTooCoarse);
}

TEST_CASE("interior iteration selects the elliptic branch") {
    const ConvexPolygon Omega = make_disk({0, 0}, 1.0);
    const FreeBoundaryConfig cfg = disk_cfg(1.05);
    const DistanceSpec spec = DistanceSpec::constant(0.5, 0.2);
    const FreeBoundaryResult res = iterate_interior(Omega, spec, cfg);
    CHECK(res.trace.converged);

    const InteriorRadii roots =
        solve_interior_radii(RadialProblem(2, 2, 0.5, 1.0, 0.5, 0.0, 1.0), 0.2);
    CHECK(max_radius_deviation(res.boundary, roots.r2) <= 3.0 * kH);
    // Elliptic (maximal) branch: much closer to r2 than to the hyperbolic r1.
    REQUIRE(roots.r1.has_value());
    double mean_r = 0.0;
    for (Vec2 v : res.boundary.vertices()) mean_r += std::hypot(v.x, v.y);
    mean_r /= res.boundary.size();
    CHECK(std::abs(mean_r - roots.r2) < std::abs(mean_r - *roots.r1));
}

TEST_CASE("interior iteration rejects lambda beyond the Bernoulli constant") {
    const ConvexPolygon Omega = make_disk({0, 0}, 1.0);
    const FreeBoundaryConfig cfg = disk_cfg(1.05);
    CHECK_THROWS_AS(iterate_interior(Omega, DistanceSpec::constant(0.5, 0.3), cfg),
                    LambdaTooLarge);
}

TEST_CASE("interior iteration on a square stays convex and self-consistent") {
    const ConvexPolygon Omega({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
    const FreeBoundaryConfig cfg = disk_cfg(1.05);
    const DistanceSpec spec = DistanceSpec::constant(0.5, 0.2);
    const FreeBoundaryResult res = iterate_interior(Omega, spec, cfg);
    CHECK(res.trace.converged);
    CHECK(check_distance_condition(res.field, res.boundary, spec).max_residual <= 3.0 * kH);
}

TEST_CASE("estimate_lambda_max: disks and the inscribed-ball bracket") {
    const FreeBoundaryConfig cfg = disk_cfg(1.05);
    const double est1 = estimate_lambda_max(make_disk({0, 0}, 1.0), 0.5, 2.0, cfg);
    CHECK(std::abs(est1 - 0.25) <= 2.0 * kH);

    const FreeBoundaryConfig cfg2 = disk_cfg(2.1);
    const double est2 = estimate_lambda_max(make_disk({0, 0}, 2.0), 0.5, 2.0, cfg2);
    CHECK(std::abs(est2 - 0.5) <= 2.0 * kH); // scales linearly with R

    // The inscribed-ball lambda_max never exceeds the
    // estimate beyond the bracket width.
    const ConvexPolygon square({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
    const double est3 = estimate_lambda_max(square, 0.5, 2.0, cfg);
    const double lower = interior_extremum(RadialProblem(2, 2, 0.5, 1.0, 0.5, 0.0, 1.0)).lambda_max;
    CHECK(lower <= est3 + 2.0 * kH);
}

TEST_CASE("check_distance_condition: oracle configuration and perturbation") {
    const ConvexPolygon K = make_disk({0, 0}, 0.3);
    const FreeBoundaryConfig cfg = disk_cfg(1.1);
    const DistanceSpec spec = DistanceSpec::constant(0.4, 0.2);
    const double Rstar = solve_exterior_radius(2, 2, 0.3, 0.4, 0.2);
    const ConvexPolygon boundary = make_disk({0, 0}, Rstar, 128);
    const RegionMask mask = rasterize(K, boundary, cfg.grid, 1.0, 0.0);
    const ScalarField u = solve_p_capacitary(mask, cfg.pde);
    CHECK(check_distance_condition(u, boundary, spec).max_residual <= 2.0 * kH);

    // Dilating the boundary by 0.1 shows up in the residual.
    const ConvexPolygon dilated = offset_convex(boundary, 0.1);
    CHECK(check_distance_condition(u, dilated, spec).max_residual >= 0.1 - 2.0 * kH);

    // Constant-mode and function-mode lambda produce identical reports.
    const DistanceSpec fn_spec =
        DistanceSpec::function(0.4, [](Vec2) { return 0.2; }, 0.2, 0.2);
    const ConditionReport a = check_distance_condition(u, boundary, spec);
    const ConditionReport b = check_distance_condition(u, boundary, fn_spec);
    CHECK(a.max_residual == b.max_residual);
}

TEST_CASE("variable lambda(x) == c reproduces the constant mode bit for bit") {
    const ConvexPolygon K = make_disk({0, 0}, 0.3);
    const FreeBoundaryConfig cfg = disk_cfg(1.3);
    const ConvexPolygon omega0 = make_disk({0, 0}, 1.1, 128);

    const FreeBoundaryResult c_res =
        iterate_exterior(K, DistanceSpec::constant(0.4, 0.2), cfg, omega0);
    // Affine expression with zero slopes evaluates to exactly 0.2 everywhere.
    const DistanceSpec fn_spec = DistanceSpec::function(
        0.4, [](Vec2 v) { return 0.2 + 0.0 * v.x + 0.0 * v.y; }, 0.2, 0.2);
    const FreeBoundaryResult f_res = iterate_exterior(K, fn_spec, cfg, omega0);

    REQUIRE(c_res.boundary.size() == f_res.boundary.size());
    for (std::size_t i = 0; i < c_res.boundary.size(); ++i) {
        CHECK(c_res.boundary.vertices()[i].x == f_res.boundary.vertices()[i].x);
        CHECK(c_res.boundary.vertices()[i].y == f_res.boundary.vertices()[i].y);
    }
    REQUIRE(c_res.field.values.size() == f_res.field.values.size());
    CHECK(std::equal(c_res.field.values.begin(), c_res.field.values.end(),
                     f_res.field.values.begin()));
}

TEST_CASE("variable lambda: affine constraint shifts the boundary sideways") {
    const ConvexPolygon K = make_disk({0, 0}, 0.3);
    const FreeBoundaryConfig cfg = disk_cfg(1.3);
    const DistanceSpec spec = DistanceSpec::function(
        0.4, [](Vec2 v) { return 0.2 + 0.1 * v.x; }, 0.2 - 0.1 * 1.4, 0.2 + 0.1 * 1.4);
    const FreeBoundaryResult res = iterate_exterior(K, spec, cfg, make_disk({0, 0}, 1.1, 128));
    CHECK(res.trace.converged);
    CHECK(check_distance_condition(res.field, res.boundary, spec).max_residual <= 3.0 * kH);
    // The boundary reaches farther on the +x side where lambda is larger.
    const BBox box = res.boundary.bbox();
    CHECK(box.hi.x > -box.lo.x + kH);
}

TEST_CASE("two-phase: symmetric joining against the radial shooting oracle") {
    const ConvexPolygon K1 = make_disk({0, 0}, 0.2);
    const ConvexPolygon K3 = make_disk({0, 0}, 1.0);
    const FreeBoundaryConfig cfg = disk_cfg(1.05);
    const TwoPhaseResult res =
        two_phase_iterate(K1, K3, JoiningFunction::symmetric(), 0.3, 2.0, cfg);
    CHECK(res.trace.converged);
    CHECK(res.trace.rows.back().condition_residual <= 3.0 * kH);

    const double s_star = two_phase_oracle(0.2, 1.0, 0.3, 2.0, [](double q) { return q; });
    CHECK(max_radius_deviation(res.interface, s_star) <= 3.0 * kH);
    CHECK(res.separation_ratio > 0.0);
}

TEST_CASE("two-phase: builtin joining g(x,q) = 1/(1+q)") {
    // The classic g needs a wide ring: with K3 = B_4 the joining equation has
    // its root near s = 1.66.
    const double h = 1.0 / 32.0;
    const ConvexPolygon K1 = make_disk({0, 0}, 0.3);
    const ConvexPolygon K3 = make_disk({0, 0}, 4.0, 128);
    const FreeBoundaryConfig cfg = disk_cfg(4.1, 2.0, h);
    const JoiningFunction g = JoiningFunction::classic([](Vec2) { return 1.0; }, 1.0);
    const TwoPhaseResult res = two_phase_iterate(K1, K3, g, 0.3, 2.0, cfg);
    CHECK(res.trace.converged);
    CHECK(res.trace.rows.back().condition_residual <= 3.0 * h);

    const double s_star =
        two_phase_oracle(0.3, 4.0, 0.3, 2.0, [](double q) { return 1.0 / (1.0 + q); });
    CHECK(max_radius_deviation(res.interface, s_star) <= 3.0 * h);
}

TEST_CASE("two-phase: separation ratio stays positive across configurations") {
    const FreeBoundaryConfig cfg = disk_cfg(1.05);
    double min_ratio = 1.0;
    const ConvexPolygon square({{-0.22, -0.22}, {0.22, -0.22}, {0.22, 0.22}, {-0.22, 0.22}});
    const ConvexPolygon bodies[] = {make_disk({0, 0}, 0.2), make_disk({0.05, 0}, 0.25), square};
    for (const ConvexPolygon& K1 : bodies) {
        const TwoPhaseResult res = two_phase_iterate(K1, make_disk({0, 0}, 1.0),
                                                     JoiningFunction::symmetric(), 0.3, 2.0, cfg);
        min_ratio = std::min(min_ratio, res.separation_ratio);
    }
    CHECK(min_ratio > 0.0);
}

TEST_CASE("two-phase comparison: enlarging K2 raises both potentials") {
    // Maximum-principle direction, cross-checked against the radial closed
    // form: growing the zero-level body raises u1 (1 on K1, 0 on dK2) and
    // raises u2 (0 on dK2, -1 on dK3) on shared nodes.
    const double h = kH;
    const Grid2D grid = make_grid(BBox{{-1, -1}, {1, 1}}, h, 4 * h);
    const ConvexPolygon K1 = make_disk({0, 0}, 0.2);
    const ConvexPolygon K3 = make_disk({0, 0}, 1.0);
    const ConvexPolygon K2 = make_disk({0, 0}, 0.5, 128);
    const ConvexPolygon K2big = offset_convex(K2, 2 * h);
    PLaplaceConfig pde;
    pde.p = 2.0;

    const RegionMask m1 = rasterize(K1, K2, grid, 1.0, 0.0);
    const RegionMask m1b = rasterize(K1, K2big, grid, 1.0, 0.0);
    const ScalarField u1 = solve_p_capacitary(m1, pde);
    const ScalarField u1b = solve_p_capacitary(m1b, pde);
    const double lip1 = 1.0 / (0.2 * std::log(0.5 / 0.2));
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            if (m1.at(i, j) != NodeLabel::Annulus || m1b.at(i, j) != NodeLabel::Annulus) continue;
            CHECK(u1b.at(i, j) >= u1.at(i, j) - 5.0 * h * lip1);
        }

    const RegionMask m2 = rasterize(K2, K3, grid, 0.0, -1.0);
    const RegionMask m2b = rasterize(K2big, K3, grid, 0.0, -1.0);
    const ScalarField u2 = solve_p_capacitary(m2, pde);
    const ScalarField u2b = solve_p_capacitary(m2b, pde);
    const double lip2 = 1.0 / (0.5 * std::log(1.0 / 0.5));
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            if (m2.at(i, j) != NodeLabel::Annulus || m2b.at(i, j) != NodeLabel::Annulus) continue;
            CHECK(u2b.at(i, j) >= u2.at(i, j) - 5.0 * h * lip2);
        }

    // The radial closed form confirms the direction independently of the
    // discretization.
    const double rho = 0.8;
    const double u2_small = radial_potential(RadialProblem(2, 2, 0.5, 1.0, -0.5, 0.0, -1.0), rho);
    const double u2_big =
        radial_potential(RadialProblem(2, 2, 0.5 + 2 * h, 1.0, -0.5, 0.0, -1.0), rho);
    CHECK(u2_big > u2_small);
}

TEST_CASE("Bernoulli limit: nesting and annulus-thickness scaling in omega") {
    const double h = 1.0 / 48.0;
    FreeBoundaryConfig cfg;
    cfg.grid = Grid2D({-1, -1}, h, 8, 8); // driver refits the grid
    cfg.pde.p = 2.0;
    const ConvexPolygon K = make_disk({0, 0}, 0.3);

    const BernoulliReport slow = run_converge_bernoulli(K, 2.0, 0.2, 3, cfg);
    REQUIRE(slow.steps.size() == 3);
    for (std::size_t i = 1; i < slow.steps.size(); ++i)
        CHECK(slow.steps[i].max_outside <= h); // nested within h

    // Doubling omega shrinks the limiting annulus; the measured thickness
    // ratio must match the radial-oracle ratio within 10%.
    const BernoulliReport fast = run_converge_bernoulli(K, 4.0, 0.2, 3, cfg);
    const auto thickness = [&](const BernoulliReport& rep) {
        double mean_r = 0.0;
        const auto& verts = rep.steps.back().boundary.vertices();
        for (Vec2 v : verts) mean_r += std::hypot(v.x, v.y);
        return mean_r / verts.size() - 0.3;
    };
    const double lam_fin = slow.steps.back().lambda;
    const double oracle_ratio = (solve_exterior_radius(2, 2, 0.3, 4.0 * lam_fin, lam_fin) - 0.3) /
                                (solve_exterior_radius(2, 2, 0.3, 2.0 * lam_fin, lam_fin) - 0.3);
    const double measured_ratio = thickness(fast) / thickness(slow);
    CHECK(std::abs(measured_ratio / oracle_ratio - 1.0) <= 0.1);
}

TEST_CASE("joining function probes reject non-positive g") {
    JoiningFunction bad;
    bad.g = [](Vec2, double q) { return 0.5 - q; }; // goes negative
    CHECK_THROWS_AS(bad.validate_probes(BBox{{-1, -1}, {1, 1}}), DegenerateGeometry);
    JoiningFunction ok = JoiningFunction::classic([](Vec2) { return 1.0; }, 2.0);
    CHECK_NOTHROW(ok.validate_probes(BBox{{-1, -1}, {1, 1}}));
}
