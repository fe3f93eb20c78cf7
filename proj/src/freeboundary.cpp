#include "pbern/freeboundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pbern/radial.hpp"

namespace pbern {

DistanceSpec DistanceSpec::constant(double l, double lambda) {
    if (!(0.0 < l && l < 1.0)) throw OutOfRange("DistanceSpec: l outside (0,1)");
    if (lambda <= 0.0) throw OutOfRange("DistanceSpec: lambda must be positive");
    DistanceSpec s;
    s.l = l;
    s.lambda_const = lambda;
    return s;
}

DistanceSpec DistanceSpec::function(double l, std::function<double(Vec2)> fn, double c0, double c1) {
    if (!(0.0 < l && l < 1.0)) throw OutOfRange("DistanceSpec: l outside (0,1)");
    if (!(0.0 < c0 && c0 <= c1)) throw OutOfRange("DistanceSpec: need 0 < c0 <= c1");
    if (!fn) throw OutOfRange("DistanceSpec: null lambda function");
    DistanceSpec s;
    s.l = l;
    s.variable = true;
    s.lambda_fn = std::move(fn);
    s.c0 = c0;
    s.c1 = c1;
    return s;
}

DistanceSpec DistanceSpec::bernoulli(double omega, double lambda) {
    if (omega <= 0.0) throw OutOfRange("DistanceSpec: omega must be positive");
    DistanceSpec s = constant(omega * lambda, lambda);
    s.omega = omega;
    return s;
}

double FreeBoundaryConfig::effective_outer_tol() const {
    const double tol = outer_tol > 0.0 ? outer_tol : 1.5 * grid.h;
    if (tol < grid.h) throw OutOfRange("FreeBoundaryConfig: outer_tol below grid spacing");
    return tol;
}

namespace {

// Unsigned distance to the level curve, exact wherever it can fall below the
// local lambda plus a safety band; elsewhere a lower bound, which is all the
// sign of the indicator field needs.
double banded_distance(const SegmentLocator& loc, Vec2 x, double lam, double band) {
    return loc.distance_within(x, lam + band);
}

struct RingExtraction {
    std::vector<Vec2> ring; // largest closed ring of the zero level set
    int positive_nodes = 0;
};

RingExtraction extract_zero_ring(const ScalarField& psi) {
    RingExtraction out;
    for (double v : psi.values)
        if (v >= 0.0) ++out.positive_nodes;
    Polyline curve = extract_level_curve(psi, 0.0);
    double best = -1.0;
    for (const auto& c : curve.chains) {
        if (!c.closed || c.pts.size() < 3) continue;
        double a2 = 0.0;
        for (std::size_t i = 0; i < c.pts.size(); ++i)
            a2 += cross(c.pts[i], c.pts[(i + 1) % c.pts.size()]);
        if (std::abs(a2) > best) {
            best = std::abs(a2);
            out.ring = c.pts;
        }
    }
    return out;
}

std::vector<Vec2> simplify_ring(const std::vector<Vec2>& ring, double min_spacing) {
    std::vector<Vec2> out;
    for (Vec2 p : ring)
        if (out.empty() || distance(out.back(), p) >= min_spacing) out.push_back(p);
    while (out.size() >= 2 && distance(out.front(), out.back()) < min_spacing) out.pop_back();
    return out;
}

ConvexPolygon ring_to_boundary(const std::vector<Vec2>& ring, bool convexify, double h) {
    if (ring.size() < 3) throw DegenerateGeometry("traced boundary has fewer than 3 points");
    if (convexify) return convex_hull(ring);
    return ConvexPolygon::unchecked(simplify_ring(ring, h / 3.0));
}

void check_inside_grid(const ConvexPolygon& poly, const Grid2D& grid) {
    const BBox pb = poly.bbox();
    const BBox gb = grid.bbox();
    const double m = 2.0 * grid.h;
    if (pb.lo.x - m < gb.lo.x || pb.lo.y - m < gb.lo.y || pb.hi.x + m > gb.hi.x ||
        pb.hi.y + m > gb.hi.y)
        throw DegenerateGeometry("free boundary reached the grid border");
}

double condition_residual_against(const SegmentLocator& loc, const ConvexPolygon& boundary,
                                  const DistanceSpec& spec, double h) {
    double worst = 0.0;
    for (Vec2 x : boundary.sample_boundary(h / 2.0))
        worst = std::max(worst, std::abs(loc.distance(x) - spec.lambda_at(x)));
    return worst;
}

// Masks used inside the fixed-point loops compensate the half-cell staircase
// bias: nodes switch label at the polygon, which parks the effective
// Dirichlet surface about h/2 beyond it; offsetting the bodies by h/2 centers
// the staircase on the polygon. The public rasterize keeps its plain
// semantics.
RegionMask rasterize_centered(const ConvexPolygon& inner, const ConvexPolygon& outer,
                              const Grid2D& grid, double v_in, double v_out) {
    const double s = 0.5 * grid.h;
    return rasterize(offset_convex(inner, s), offset_convex(outer, -s), grid, v_in, v_out);
}

// Rate-aware stop for the geometric fixed-point loops. The remaining error of
// a contraction is about step * rate / (1 - rate), so stopping on the raw
// step alone under-resolves slow contractions (rate -> 1 as lambda -> 0).
// Stop once the projected remaining error drops below the target, or at the
// sub-grid noise floor.
struct StepMonitor {
    double target;
    double h;
    double prev_step = -1.0;
    int seen = 0;

    bool converged(double step) {
        const double rate = prev_step > 0.0 ? std::clamp(step / prev_step, 0.05, 0.95) : 0.95;
        prev_step = step;
        // A rate estimate needs two steps; a single small first step says
        // nothing about the remaining error of a slow contraction.
        return ++seen >= 2 && step < std::max(target * (1.0 - rate), 0.1 * h);
    }
};

} // namespace

FreeBoundaryResult iterate_exterior(const ConvexPolygon& K, const DistanceSpec& spec,
                                    const FreeBoundaryConfig& cfg, const ConvexPolygon& omega0) {
    const Grid2D& grid = cfg.grid;
    const double h = grid.h;
    const double tol = cfg.effective_outer_tol();
    if (spec.lambda_lo() < 2.0 * h)
        throw GridTooCoarse("iterate_exterior: lambda below 2h");
    check_inside_grid(omega0, grid);

    ConvexPolygon cur = omega0;
    ScalarField u;
    IterationTrace trace;
    StepMonitor monitor{tol, h};
    for (int n = 1; n <= cfg.outer_max; ++n) {
        const RegionMask mask = rasterize_centered(K, cur, grid, 1.0, 0.0);
        SolveInfo pde_info;
        u = solve_p_capacitary(mask, cfg.pde, n > 1 ? &u : nullptr, &pde_info);

        const Polyline gamma = extract_level_curve(u, spec.l);
        const SegmentLocator loc(gamma, std::max(2.0 * h, spec.lambda_hi()));

        // omega_n := {u >= l} union {dist(x, Gamma_l) <= lambda(x)} as the
        // positive set of a node field, traced with sub-grid interpolation.
        ScalarField psi(grid);
        const double band = 2.0 * h;
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                const Vec2 x = grid.pos(i, j);
                const double lam = spec.lambda_at(x);
                const double d = banded_distance(loc, x, lam, band);
                psi.at(i, j) = std::max(u.at(i, j) - spec.l, lam - d);
            }
        const RingExtraction ext = extract_zero_ring(psi);
        ConvexPolygon next = ring_to_boundary(ext.ring, cfg.convexify, h);
        check_inside_grid(next, grid);

        IterationRecord row;
        row.pde_residual = pde_info.residual;
        row.annulus_nodes = mask.annulus_count;
        row.condition_residual = condition_residual_against(loc, cur, spec, h);
        row.hausdorff_step = hausdorff(next, cur, h / 4.0);
        trace.rows.push_back(row);
        trace.boundaries.push_back(next);

        if (monitor.converged(row.hausdorff_step)) {
            trace.converged = true;
            return {std::move(u), std::move(cur), std::move(trace)};
        }
        cur = std::move(next);
    }
    throw NonConvergence("iterate_exterior: outer iteration cap reached", cfg.outer_max,
                         trace.rows.empty() ? 0.0 : trace.rows.back().hausdorff_step);
}

FreeBoundaryResult iterate_interior(const ConvexPolygon& Omega, const DistanceSpec& spec,
                                    const FreeBoundaryConfig& cfg) {
    const Grid2D& grid = cfg.grid;
    const double h = grid.h;
    const double tol = cfg.effective_outer_tol();
    if (spec.variable)
        throw OutOfRange("iterate_interior: constant-lambda mode only");
    const double lambda = spec.lambda_const;
    if (lambda < 2.0 * h) throw GridTooCoarse("iterate_interior: lambda below 2h");
    check_inside_grid(Omega, grid);

    // Every supersolution keeps dist(x, dOmega) >= lambda, so the eroded body
    // is a valid maximal starting iterate.
    ConvexPolygon cur = [&] {
        try {
            return offset_convex(Omega, -lambda);
        } catch (const DegenerateGeometry&) {
            throw LambdaTooLarge("iterate_interior: erosion by lambda is empty");
        }
    }();

    ScalarField u;
    IterationTrace trace;
    StepMonitor monitor{tol, h};
    for (int n = 1; n <= cfg.outer_max; ++n) {
        const RegionMask mask = rasterize_centered(cur, Omega, grid, 0.0, 1.0);
        SolveInfo pde_info;
        u = solve_p_capacitary(mask, cfg.pde, n > 1 ? &u : nullptr, &pde_info);

        const Polyline gamma = extract_level_curve(u, spec.l);
        const SegmentLocator loc(gamma, std::max(2.0 * h, lambda));

        // K_n := hull{u <= l and dist(x, Gamma_l) >= lambda}
        ScalarField psi(grid);
        const double band = 2.0 * h;
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                const Vec2 x = grid.pos(i, j);
                const double d = banded_distance(loc, x, lambda, band);
                psi.at(i, j) = std::min(spec.l - u.at(i, j), d - lambda);
            }

        RingExtraction ext;
        ConvexPolygon next = [&] {
            try {
                ext = extract_zero_ring(psi);
                if (ext.positive_nodes < 9)
                    throw DegenerateGeometry("interior iterate below 3x3 nodes");
                return ring_to_boundary(ext.ring, true, h);
            } catch (const Error&) {
                throw LambdaTooLarge("iterate_interior: iterate collapsed (lambda beyond the "
                                     "Bernoulli constant)");
            }
        }();

        IterationRecord row;
        row.pde_residual = pde_info.residual;
        row.annulus_nodes = mask.annulus_count;
        row.condition_residual = condition_residual_against(loc, cur, spec, h);
        row.hausdorff_step = hausdorff(next, cur, h / 4.0);
        trace.rows.push_back(row);
        trace.boundaries.push_back(next);

        if (monitor.converged(row.hausdorff_step)) {
            trace.converged = true;
            return {std::move(u), std::move(cur), std::move(trace)};
        }
        cur = std::move(next);
    }
    throw NonConvergence("iterate_interior: outer iteration cap reached", cfg.outer_max,
                         trace.rows.empty() ? 0.0 : trace.rows.back().hausdorff_step);
}

ConditionReport check_distance_condition(const ScalarField& field, const ConvexPolygon& boundary,
                                         const DistanceSpec& spec) {
    const double h = field.grid.h;
    const Polyline gamma = extract_level_curve(field, spec.l);
    const SegmentLocator loc(gamma, std::max(2.0 * h, spec.lambda_hi()));
    ConditionReport report;
    for (Vec2 x : boundary.sample_boundary(h / 2.0)) {
        ConditionSample s;
        s.x = x;
        s.dist = loc.distance(x);
        s.lambda = spec.lambda_at(x);
        s.residual = std::abs(s.dist - s.lambda);
        report.max_residual = std::max(report.max_residual, s.residual);
        report.samples.push_back(s);
    }
    return report;
}

double estimate_lambda_max(const ConvexPolygon& Omega, double l, double p,
                           const FreeBoundaryConfig& cfg) {
    const double h = cfg.grid.h;
    // Radial brackets: the inscribed ball bounds the
    // Bernoulli constant from below, any enclosing ball from above.
    const double r_in = inscribed_radius(Omega);
    const double r_out = enclosing_radius(Omega);
    const RadialProblem base_in(p, 2, 0.5 * r_in, r_in, l, 0.0, 1.0);
    const RadialProblem base_out(p, 2, 0.5 * r_out, r_out, l, 0.0, 1.0);
    double lo = interior_extremum(base_in).lambda_max;
    double hi = interior_extremum(base_out).lambda_max;

    FreeBoundaryConfig probe = cfg;
    probe.pde.p = p;
    probe.outer_tol = h; // tighter stop for the probes: avoids drift-through
    probe.outer_max = std::max(cfg.outer_max, 400);

    while (hi - lo > 2.0 * h) {
        const double mid = 0.5 * (lo + hi);
        bool ok = true;
        try {
            iterate_interior(Omega, DistanceSpec::constant(l, mid), probe);
        } catch (const LambdaTooLarge&) {
            ok = false;
        }
        (ok ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

JoiningFunction JoiningFunction::symmetric() {
    JoiningFunction g;
    g.g = [](Vec2, double q) { return q; };
    g.c1 = 1.0;
    g.c2 = 1.0;
    g.q0 = 0.0;
    return g;
}

JoiningFunction JoiningFunction::classic(std::function<double(Vec2)> a, double alpha) {
    if (alpha <= 0.0) throw OutOfRange("JoiningFunction::classic: alpha must be positive");
    JoiningFunction g;
    g.g = [a = std::move(a), alpha](Vec2 x, double q) {
        return 1.0 / std::pow(std::pow(a(x), alpha) + std::pow(q, alpha), 1.0 / alpha);
    };
    return g;
}

void JoiningFunction::validate_probes(const BBox& box) const {
    // Positivity (H1) is checked on a probe lattice. Monotonicity (H2), the
    // growth bounds (H4) and concavity (H3) stay user obligations: the
    // builtin classic example is decreasing in q, so enforcing (H2) would
    // reject it.
    if (!g) throw OutOfRange("JoiningFunction: null evaluator");
    const double qs[] = {1e-3, 0.01, 0.1, 0.3, 1.0, 3.0};
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; j <= 3; ++j) {
            const Vec2 x{box.lo.x + box.width() * i / 3.0, box.lo.y + box.height() * j / 3.0};
            for (double q : qs) {
                const double v = this->g(x, q);
                if (!std::isfinite(v) || !(v > 0.0))
                    throw DegenerateGeometry("joining function not positive (H1)");
            }
        }
}

TwoPhaseResult two_phase_iterate(const ConvexPolygon& K1, const ConvexPolygon& K3,
                                 const JoiningFunction& g, double l, double p,
                                 const FreeBoundaryConfig& cfg) {
    const Grid2D& grid = cfg.grid;
    const double h = grid.h;
    if (!(0.0 < l && l < 1.0)) throw OutOfRange("two_phase_iterate: l outside (0,1)");
    if (boundary_gap(K1, K3, h / 4.0) < 6.0 * h)
        throw EmptyAnnulus("two_phase_iterate: gap between K1 and K3 below 6h");
    g.validate_probes(K3.bbox());
    check_inside_grid(K3, grid);

    PLaplaceConfig pde = cfg.pde;
    pde.p = p;

    // Initial interface: a deep sublevel set of the full capacitary potential
    // of K3 \ K1 (u = 1 on K1, u = -1 on dK3), epsilon near -1 but kept a few
    // cells away from both bodies.
    ConvexPolygon cur = [&] {
        const RegionMask mask_full = rasterize_centered(K1, K3, grid, 1.0, -1.0);
        const ScalarField u_full = solve_p_capacitary(mask_full, pde);
        for (double eps = -0.8; eps <= 0.45; eps += 0.1) {
            Polyline curve;
            try {
                curve = extract_level_curve(u_full, eps);
            } catch (const LevelNotPresent&) {
                continue;
            }
            double best = -1.0;
            std::vector<Vec2> ring;
            for (const auto& c : curve.chains) {
                if (!c.closed || c.pts.size() < 3) continue;
                double a2 = 0.0;
                for (std::size_t i = 0; i < c.pts.size(); ++i)
                    a2 += cross(c.pts[i], c.pts[(i + 1) % c.pts.size()]);
                if (std::abs(a2) > best) {
                    best = std::abs(a2);
                    ring = c.pts;
                }
            }
            if (ring.size() < 3) continue;
            ConvexPolygon cand = convex_hull(ring);
            if (boundary_gap(K1, cand, h / 4.0) >= 3.5 * h &&
                boundary_gap(cand, K3, h / 4.0) >= 3.5 * h)
                return cand;
        }
        throw DegenerateGeometry("two_phase_iterate: no feasible initial interface");
    }();

    ScalarField u1, u2;
    IterationTrace trace;
    double eta = 0.5;
    double prev_sign = 0.0;
    int flips = 0;

    for (int n = 1; n <= cfg.outer_max; ++n) {
        const RegionMask mask1 = rasterize_centered(K1, cur, grid, 1.0, 0.0);
        const RegionMask mask2 = rasterize_centered(cur, K3, grid, 0.0, -1.0);
        SolveInfo info1, info2;
        u1 = solve_p_capacitary(mask1, pde, n > 1 ? &u1 : nullptr, &info1);
        u2 = solve_p_capacitary(mask2, pde, n > 1 ? &u2 : nullptr, &info2);

        const Polyline gamma1 = extract_level_curve(u1, l);
        const Polyline gamma2 = extract_level_curve(u2, -l);
        const SegmentLocator loc1(gamma1), loc2(gamma2);

        // Joining residual per interface vertex.
        const auto& verts = cur.vertices();
        const std::size_t m = verts.size();
        std::vector<double> G(m);
        double max_abs = 0.0, signed_at_max = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d1 = loc1.distance(verts[i]);
            const double d2 = loc2.distance(verts[i]);
            G[i] = d1 - g.g(verts[i], d2);
            if (std::abs(G[i]) > max_abs) {
                max_abs = std::abs(G[i]);
                signed_at_max = G[i];
            }
        }

        IterationRecord row;
        row.condition_residual = max_abs;
        row.pde_residual = std::max(info1.residual, info2.residual);
        row.annulus_nodes = mask1.annulus_count + mask2.annulus_count;

        if (max_abs < 1.25 * h) {
            row.hausdorff_step = 0.0;
            trace.rows.push_back(row);
            trace.converged = true;
            const double sep = boundary_gap(K1, cur, h / 4.0) / boundary_gap(K1, K3, h / 4.0);
            return {std::move(cur), std::move(u1), std::move(u2), std::move(trace), sep};
        }

        if (prev_sign != 0.0 && signed_at_max * prev_sign < 0.0) {
            if (++flips >= 2) {
                eta = std::max(0.02, 0.5 * eta);
                flips = 0;
            }
        }
        prev_sign = signed_at_max;

        // Move every vertex along the inward normal by clamp(eta G, -h, h):
        // G > 0 marks a local strict supersolution, so the step shrinks K2.
        const Vec2 c = cur.centroid();
        std::vector<Vec2> moved(m);
        for (std::size_t i = 0; i < m; ++i) {
            const Vec2 prev = verts[(i + m - 1) % m], next = verts[(i + 1) % m];
            Vec2 n1{(verts[i] - prev).y, -(verts[i] - prev).x};
            Vec2 n2{(next - verts[i]).y, -(next - verts[i]).x};
            Vec2 nrm = (1.0 / std::max(norm(n1), 1e-300)) * n1 +
                       (1.0 / std::max(norm(n2), 1e-300)) * n2;
            const double len = norm(nrm);
            nrm = len > 0.0 ? (1.0 / len) * nrm : Vec2{verts[i].x - c.x, verts[i].y - c.y};
            const double step = std::clamp(eta * G[i], -h, h);
            moved[i] = verts[i] - step * nrm;
        }
        ConvexPolygon next = convex_hull(moved);
        if (boundary_gap(K1, next, h / 4.0) < 3.0 * h || boundary_gap(next, K3, h / 4.0) < 3.0 * h)
            throw DegenerateGeometry("two_phase_iterate: interface collapsed onto K1 or K3");

        row.hausdorff_step = hausdorff(next, cur, h / 4.0);
        trace.rows.push_back(row);
        cur = std::move(next);
    }
    throw NonConvergence("two_phase_iterate: outer iteration cap reached", cfg.outer_max,
                         trace.rows.empty() ? 0.0 : trace.rows.back().condition_residual);
}

} // namespace pbern
