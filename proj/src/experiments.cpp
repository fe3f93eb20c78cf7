#include "pbern/experiments.hpp"

#include <algorithm>
#include <cmath>

namespace pbern {

namespace {

// Median |grad u| one stencil inside the boundary: centered difference of the
// interpolated field along the inward edge normal, centered 2h inside. Stays
// clear of the staircase fringe, unlike sampling the nodal gradient field.
double gradient_statistic(const ScalarField& u, const ConvexPolygon& boundary) {
    const double h = u.grid.h;
    std::vector<double> vals;
    const auto& v = boundary.vertices();
    const std::size_t n = v.size();
    for (std::size_t e = 0; e < n; ++e) {
        const Vec2 a = v[e], b = v[(e + 1) % n];
        const double len = norm(b - a);
        if (len <= 0.0) continue;
        const Vec2 inward{-(b - a).y / len, (b - a).x / len}; // left of a CCW edge
        const int k = std::max(1, static_cast<int>(std::ceil(len / (h / 2.0))));
        for (int i = 0; i < k; ++i) {
            const Vec2 x = a + (static_cast<double>(i) / k) * (b - a);
            const double u_near = u.sample(x + h * inward);
            const double u_deep = u.sample(x + 3.0 * h * inward);
            vals.push_back(std::abs(u_deep - u_near) / (2.0 * h));
        }
    }
    if (vals.empty()) return 0.0;
    std::sort(vals.begin(), vals.end());
    return vals[vals.size() / 2];
}

// Largest excursion of the boundary of `inner` outside `outer` (0 when nested).
double max_outside(const ConvexPolygon& inner, const ConvexPolygon& outer, double pitch) {
    double worst = 0.0;
    for (Vec2 x : inner.sample_boundary(pitch))
        worst = std::max(worst, -outer.signed_boundary_distance(x));
    return worst;
}

// The mask-quantized fixed point stalls an offset of order h/(1-rate) from
// the continuum solution, which matters when the contraction rate approaches
// one (small lambda). Correct the boundary by the rate-compensated median of
// the signed distance-condition residual; exact for radial configurations.
struct Polished {
    ConvexPolygon boundary;
    ScalarField field;
};

Polished polish_exterior(const ConvexPolygon& K, const DistanceSpec& spec,
                         const FreeBoundaryConfig& cfg, ConvexPolygon boundary) {
    const double h = cfg.grid.h;
    const double clamp_step = 0.3 * spec.lambda_lo();
    ScalarField u;
    // Secant iteration on the uniform offset t: the median signed residual
    // med(t) is nearly linear with slope -(1 - rate), so two solves calibrate
    // the sensitivity and the next shot lands within a fraction of h.
    double slope = 1.0;
    double prev_med = 0.0, prev_shift = 0.0;
    for (int pass = 0; pass < 6; ++pass) {
        const RegionMask mask = rasterize(offset_convex(K, 0.5 * h), offset_convex(boundary, -0.5 * h),
                                          cfg.grid, 1.0, 0.0);
        u = solve_p_capacitary(mask, cfg.pde, pass > 0 ? &u : nullptr);
        if (pass == 5) break;
        const SegmentLocator loc(extract_level_curve(u, spec.l), std::max(2.0 * h, spec.lambda_hi()));
        std::vector<double> resid;
        for (Vec2 x : boundary.sample_boundary(h / 2.0))
            resid.push_back(loc.distance(x) - spec.lambda_at(x));
        std::sort(resid.begin(), resid.end());
        const double med = resid[resid.size() / 2];
        if (pass > 0 && prev_shift != 0.0)
            slope = std::clamp((prev_med - med) / prev_shift, 0.05, 2.0);
        if (std::abs(med) / slope <= 0.2 * h) break;
        const double shift = std::clamp(med / slope, -clamp_step, clamp_step);
        boundary = offset_convex(boundary, -shift);
        prev_med = med;
        prev_shift = shift;
    }
    return {std::move(boundary), std::move(u)};
}

} // namespace

BernoulliReport run_converge_bernoulli(const ConvexPolygon& K, double omega, double lambda0,
                                       int n_steps, const FreeBoundaryConfig& cfg) {
    if (n_steps < 3) throw OutOfRange("run_converge_bernoulli: need at least 3 steps");
    if (omega <= 0.0 || lambda0 <= 0.0)
        throw OutOfRange("run_converge_bernoulli: omega and lambda0 must be positive");
    const double h = cfg.grid.h;

    BernoulliReport report;
    // Start from a comfortably large radial supersolution around K.
    const Vec2 c = K.centroid();
    double r_enc = 0.0;
    for (Vec2 v : K.vertices()) r_enc = std::max(r_enc, distance(c, v));
    const double p = cfg.pde.p;
    const double R0 = solve_exterior_radius(p, 2, r_enc, std::min(omega * lambda0, 0.95), 1.5 * lambda0);
    ConvexPolygon prev = make_disk(c, R0, 128);

    // Re-fit the grid around the starting supersolution with the same spacing.
    FreeBoundaryConfig run_cfg = cfg;
    run_cfg.grid = make_grid(prev.bbox(), h, 4.0 * h);

    bool have_prev_solution = false;
    ConvexPolygon prev_solution = prev;
    for (int n = 0; n < n_steps; ++n) {
        const double lambda = lambda0 * std::pow(2.0, -n);
        if (lambda < 2.0 * h) {
            report.truncated = n_steps - n;
            break;
        }
        const DistanceSpec spec = DistanceSpec::bernoulli(omega, lambda);
        FreeBoundaryResult res = iterate_exterior(K, spec, run_cfg, prev);

        Polished fin = polish_exterior(K, spec, run_cfg, std::move(res.boundary));

        const double ghat = gradient_statistic(fin.field, fin.boundary);
        double h_prev = 0.0, outside = 0.0;
        if (have_prev_solution) {
            h_prev = hausdorff(fin.boundary, prev_solution, h / 4.0);
            outside = max_outside(fin.boundary, prev_solution, h / 4.0);
        }
        report.steps.push_back(
            BernoulliStep{n, lambda, spec.l, ghat, h_prev, outside, std::move(fin.boundary)});

        prev_solution = report.steps.back().boundary;
        prev = prev_solution; // the solution for lambda_n is a supersolution for lambda_{n+1}
        have_prev_solution = true;
    }
    if (report.steps.empty()) throw GridTooCoarse("run_converge_bernoulli: lambda0 below 2h");
    return report;
}

BrunnMinkowskiReport run_brunn_minkowski(const ConvexPolygon& Omega0, const ConvexPolygon& Omega1,
                                         double l, double p, const std::vector<double>& t_grid,
                                         const FreeBoundaryConfig& cfg, double lambda0,
                                         double lambda1) {
    for (double t : t_grid)
        if (t < 0.0 || t > 1.0) throw OutOfRange("run_brunn_minkowski: t outside [0,1]");
    const double h = cfg.grid.h;

    // The grid is re-fitted around each body with the same spacing.
    const auto fitted = [&](const ConvexPolygon& body) {
        FreeBoundaryConfig c = cfg;
        c.pde.p = p;
        c.grid = make_grid(body.bbox(), h, 4.0 * h);
        return c;
    };
    const auto lambda_hat = [&](const ConvexPolygon& body) {
        return estimate_lambda_max(body, l, p, fitted(body));
    };
    const auto interior = [&](const ConvexPolygon& body, double lambda) {
        return iterate_interior(body, DistanceSpec::constant(l, lambda), fitted(body));
    };

    BrunnMinkowskiReport report;
    report.lambda_hat0 = lambda_hat(Omega0);
    report.lambda_hat1 = lambda_hat(Omega1);
    report.lambda0_used = lambda0 > 0.0 ? lambda0 : 0.8 * report.lambda_hat0;
    report.lambda1_used = lambda1 > 0.0 ? lambda1 : 0.8 * report.lambda_hat1;

    const ConvexPolygon K0 = interior(Omega0, report.lambda0_used).boundary;
    const ConvexPolygon K1 = interior(Omega1, report.lambda1_used).boundary;

    for (double t : t_grid) {
        const ConvexPolygon Omega_t = minkowski_combine(Omega0, Omega1, t);
        BrunnMinkowskiRow row;
        row.t = t;
        row.lambda_hat = lambda_hat(Omega_t);
        row.deficit = row.lambda_hat - ((1.0 - t) * report.lambda_hat0 + t * report.lambda_hat1);
        const double lambda_t = (1.0 - t) * report.lambda0_used + t * report.lambda1_used;
        const ConvexPolygon K_t = interior(Omega_t, lambda_t).boundary;
        const ConvexPolygon combo = minkowski_combine(K0, K1, t);
        row.inclusion_margin = inclusion_margin(combo, K_t, h / 4.0);
        report.rows.push_back(row);
    }
    return report;
}

} // namespace pbern
