#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pbern/experiments.hpp"
#include "pbern/io.hpp"

namespace py = pybind11;
using namespace pbern;

namespace {

using PointList = std::vector<std::pair<double, double>>;

ConvexPolygon to_polygon(const PointList& pts) {
    std::vector<Vec2> v;
    v.reserve(pts.size());
    for (auto [x, y] : pts) v.push_back({x, y});
    return ConvexPolygon(std::move(v));
}

PointList from_polygon(const ConvexPolygon& p) {
    PointList out;
    out.reserve(p.size());
    for (Vec2 v : p.vertices()) out.emplace_back(v.x, v.y);
    return out;
}

py::dict trace_dict(const IterationTrace& trace) {
    py::list rows;
    for (const auto& r : trace.rows) {
        py::dict row;
        row["hausdorff_step"] = r.hausdorff_step;
        row["condition_residual"] = r.condition_residual;
        row["pde_residual"] = r.pde_residual;
        row["annulus_nodes"] = r.annulus_nodes;
        rows.append(row);
    }
    py::dict out;
    out["rows"] = rows;
    out["converged"] = trace.converged;
    return out;
}

FreeBoundaryConfig make_cfg(const BBox& box, double h, double p, bool convexify) {
    FreeBoundaryConfig cfg;
    cfg.grid = make_grid(box, h, 6.0 * h);
    cfg.pde.p = p;
    cfg.convexify = convexify;
    return cfg;
}

} // namespace

PYBIND11_MODULE(pbern, m) {
    m.doc() = "Discrete Bernoulli free boundary solver for the p-Laplacian";

    py::register_exception<DegenerateGeometry>(m, "DegenerateGeometryError");
    py::register_exception<EmptyAnnulus>(m, "EmptyAnnulusError");
    py::register_exception<LevelNotPresent>(m, "LevelNotPresentError");
    py::register_exception<LambdaTooLarge>(m, "LambdaTooLargeError");
    py::register_exception<GridTooCoarse>(m, "GridTooCoarseError");
    py::register_exception<NonConvergence>(m, "NonConvergenceError");

    // Radial closed forms.
    m.def(
        "radial_potential",
        [](double p, int N, double r, double R, double rho, double v_in, double v_out) {
            return radial_potential(RadialProblem(p, N, r, R, 0.5 * (v_in + v_out), v_in, v_out),
                                    rho);
        },
        py::arg("p"), py::arg("N"), py::arg("r"), py::arg("R"), py::arg("rho"),
        py::arg("v_in") = 1.0, py::arg("v_out") = 0.0);
    m.def(
        "level_radius",
        [](double p, int N, double r, double R, double l, double v_in, double v_out) {
            return level_radius(RadialProblem(p, N, r, R, l, v_in, v_out));
        },
        py::arg("p"), py::arg("N"), py::arg("r"), py::arg("R"), py::arg("l"), py::arg("v_in") = 1.0,
        py::arg("v_out") = 0.0);
    m.def(
        "interior_gap",
        [](double p, int N, double R, double l, double r) {
            return interior_gap(RadialProblem(p, N, 0.5 * R, R, l, 0.0, 1.0), r);
        },
        py::arg("p"), py::arg("N"), py::arg("R"), py::arg("l"), py::arg("r"));
    m.def(
        "interior_extremum",
        [](double p, int N, double R, double l) {
            const auto e = interior_extremum(RadialProblem(p, N, 0.5 * R, R, l, 0.0, 1.0));
            return py::make_tuple(e.r_max, e.lambda_max, e.lambda_min);
        },
        py::arg("p"), py::arg("N"), py::arg("R"), py::arg("l"));
    m.def(
        "solve_interior_radii",
        [](double p, int N, double R, double l, double lam) {
            const auto roots = solve_interior_radii(RadialProblem(p, N, 0.5 * R, R, l, 0.0, 1.0), lam);
            return py::make_tuple(roots.r1 ? py::cast(*roots.r1) : py::none(), roots.r2);
        },
        py::arg("p"), py::arg("N"), py::arg("R"), py::arg("l"), py::arg("lam"));
    m.def("solve_exterior_radius", &solve_exterior_radius, py::arg("p"), py::arg("N"), py::arg("r"),
          py::arg("l"), py::arg("lam"));
    m.def("bernoulli_limit", &bernoulli_limit, py::arg("p"), py::arg("N"), py::arg("R"));

    // Geometry.
    m.def(
        "convex_hull",
        [](const PointList& pts) {
            std::vector<Vec2> v;
            for (auto [x, y] : pts) v.push_back({x, y});
            return from_polygon(convex_hull(v));
        },
        py::arg("points"));
    m.def(
        "minkowski_combine",
        [](const PointList& a, const PointList& b, double t) {
            return from_polygon(minkowski_combine(to_polygon(a), to_polygon(b), t));
        },
        py::arg("p0"), py::arg("p1"), py::arg("t"));
    m.def(
        "hausdorff",
        [](const PointList& a, const PointList& b, double pitch) {
            return hausdorff(to_polygon(a), to_polygon(b), pitch);
        },
        py::arg("a"), py::arg("b"), py::arg("pitch"));
    m.def(
        "polygon_area", [](const PointList& a) { return to_polygon(a).area(); }, py::arg("points"));
    m.def(
        "make_disk",
        [](double cx, double cy, double radius, int n) {
            return from_polygon(make_disk({cx, cy}, radius, n));
        },
        py::arg("cx"), py::arg("cy"), py::arg("radius"), py::arg("n") = 64);

    // Capacitary solve on a polygonal annulus; returns rows (x, y, u) over
    // annulus and boundary nodes.
    m.def(
        "solve_capacitary",
        [](const PointList& inner, const PointList& outer, double h, double p, double v_in,
           double v_out) {
            const ConvexPolygon pin = to_polygon(inner), pout = to_polygon(outer);
            const Grid2D grid = make_grid(pout.bbox(), h, 4.0 * h);
            const RegionMask mask = rasterize(pin, pout, grid, v_in, v_out);
            PLaplaceConfig cfg;
            cfg.p = p;
            const ScalarField u = solve_p_capacitary(mask, cfg);
            std::vector<std::tuple<double, double, double>> rows;
            for (int j = 0; j < grid.ny; ++j)
                for (int i = 0; i < grid.nx; ++i) {
                    if (mask.at(i, j) != NodeLabel::Annulus) continue;
                    const Vec2 q = grid.pos(i, j);
                    rows.emplace_back(q.x, q.y, u.at(i, j));
                }
            return rows;
        },
        py::arg("inner"), py::arg("outer"), py::arg("h"), py::arg("p") = 2.0, py::arg("v_in") = 1.0,
        py::arg("v_out") = 0.0);

    // Free boundary drivers.
    m.def(
        "solve_exterior",
        [](const PointList& K, double l, double lam, double p, double h,
           const std::optional<PointList>& omega0, bool convexify) {
            const ConvexPolygon k = to_polygon(K);
            ConvexPolygon start = omega0 ? to_polygon(*omega0) : [&] {
                const Vec2 c = k.centroid();
                double r_enc = 0.0;
                for (Vec2 v : k.vertices()) r_enc = std::max(r_enc, distance(c, v));
                return make_disk(c, solve_exterior_radius(p, 2, r_enc, l, 1.5 * lam), 128);
            }();
            const FreeBoundaryConfig cfg = make_cfg(start.bbox(), h, p, convexify);
            const auto res = iterate_exterior(k, DistanceSpec::constant(l, lam), cfg, start);
            py::dict out;
            out["boundary"] = from_polygon(res.boundary);
            out["trace"] = trace_dict(res.trace);
            out["condition_residual"] =
                check_distance_condition(res.field, res.boundary, DistanceSpec::constant(l, lam))
                    .max_residual;
            return out;
        },
        py::arg("K"), py::arg("l"), py::arg("lam"), py::arg("p") = 2.0, py::arg("h") = 1.0 / 64,
        py::arg("omega0") = std::nullopt, py::arg("convexify") = true);
    m.def(
        "solve_interior",
        [](const PointList& Omega, double l, double lam, double p, double h) {
            const ConvexPolygon body = to_polygon(Omega);
            const FreeBoundaryConfig cfg = make_cfg(body.bbox(), h, p, true);
            const auto res = iterate_interior(body, DistanceSpec::constant(l, lam), cfg);
            py::dict out;
            out["boundary"] = from_polygon(res.boundary);
            out["trace"] = trace_dict(res.trace);
            return out;
        },
        py::arg("Omega"), py::arg("l"), py::arg("lam"), py::arg("p") = 2.0, py::arg("h") = 1.0 / 64);
    m.def(
        "estimate_lambda_max",
        [](const PointList& Omega, double l, double p, double h) {
            const ConvexPolygon body = to_polygon(Omega);
            return estimate_lambda_max(body, l, p, make_cfg(body.bbox(), h, p, true));
        },
        py::arg("Omega"), py::arg("l"), py::arg("p") = 2.0, py::arg("h") = 1.0 / 64);
    m.def(
        "two_phase",
        [](const PointList& K1, const PointList& K3, double l, double p, double h) {
            const ConvexPolygon k1 = to_polygon(K1), k3 = to_polygon(K3);
            const auto res =
                two_phase_iterate(k1, k3, JoiningFunction::symmetric(), l, p,
                                  make_cfg(k3.bbox(), h, p, true));
            py::dict out;
            out["interface"] = from_polygon(res.interface);
            out["separation_ratio"] = res.separation_ratio;
            out["trace"] = trace_dict(res.trace);
            return out;
        },
        py::arg("K1"), py::arg("K3"), py::arg("l"), py::arg("p") = 2.0, py::arg("h") = 1.0 / 64);
}
