#include "pbern/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace pbern {

Grid2D::Grid2D(Vec2 origin_, double h_, int nx_, int ny_)
    : origin(origin_), h(h_), nx(nx_), ny(ny_) {
    if (h <= 0.0) throw OutOfRange("Grid2D: spacing must be positive");
    if (nx < 8 || ny < 8) throw OutOfRange("Grid2D: need at least 8 nodes per axis");
}

Grid2D make_grid(const BBox& box, double h, double margin) {
    const Vec2 lo{box.lo.x - margin, box.lo.y - margin};
    const int nx = static_cast<int>(std::ceil((box.width() + 2.0 * margin) / h)) + 1;
    const int ny = static_cast<int>(std::ceil((box.height() + 2.0 * margin) / h)) + 1;
    return Grid2D(lo, h, std::max(nx, 8), std::max(ny, 8));
}

double ScalarField::sample(Vec2 p) const {
    const double fx = (p.x - grid.origin.x) / grid.h;
    const double fy = (p.y - grid.origin.y) / grid.h;
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    i = std::clamp(i, 0, grid.nx - 2);
    j = std::clamp(j, 0, grid.ny - 2);
    const double tx = std::clamp(fx - i, 0.0, 1.0);
    const double ty = std::clamp(fy - j, 0.0, 1.0);
    const double v00 = at(i, j), v10 = at(i + 1, j), v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
}

// ---------------------------------------------------------------- rasterize

namespace {

// Per-row x-interval of a convex polygon: node (i,j) is inside iff
// xl <= x <= xr for the row's interval (boundary inclusive).
struct RowSpans {
    std::vector<double> xl, xr; // per grid row; xl > xr marks an empty row

    RowSpans(const ConvexPolygon& poly, const Grid2D& g) {
        xl.assign(g.ny, 1.0);
        xr.assign(g.ny, 0.0);
        const auto& v = poly.vertices();
        const std::size_t n = v.size();
        BBox box = poly.bbox();
        const int j0 = std::max(0, static_cast<int>(std::floor((box.lo.y - g.origin.y) / g.h)));
        const int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((box.hi.y - g.origin.y) / g.h)));
        for (int j = j0; j <= j1; ++j) {
            const double y = g.origin.y + j * g.h;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            bool any = false;
            for (std::size_t e = 0; e < n; ++e) {
                const Vec2 a = v[e], b = v[(e + 1) % n];
                if (a.y == b.y) {
                    if (a.y == y) {
                        lo = std::min({lo, a.x, b.x});
                        hi = std::max({hi, a.x, b.x});
                        any = true;
                    }
                    continue;
                }
                if ((a.y - y) * (b.y - y) > 0.0) continue;
                const double x = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
                lo = std::min(lo, x);
                hi = std::max(hi, x);
                any = true;
            }
            if (any) {
                xl[j] = lo;
                xr[j] = hi;
            }
        }
    }

    bool inside(const Grid2D& g, int i, int j) const {
        const double x = g.origin.x + i * g.h;
        return xl[j] <= xr[j] && x >= xl[j] && x <= xr[j];
    }
};

} // namespace

RegionMask rasterize(const ConvexPolygon& poly_inner, const ConvexPolygon& poly_outer,
                     const Grid2D& grid, double v_in, double v_out) {
    // Containment: every inner vertex must lie inside the outer body.
    for (Vec2 v : poly_inner.vertices())
        if (!poly_outer.contains(v, 0.0))
            throw DegenerateGeometry("rasterize: inner polygon not contained in outer polygon");

    const double h = grid.h;
    const double gap = boundary_gap(poly_inner, poly_outer, h / 8.0);
    if (gap < 3.0 * h) throw EmptyAnnulus("rasterize: boundary gap below 3h");

    // The grid must provide an OUTER band around the outer polygon.
    BBox ob = poly_outer.bbox();
    BBox gb = grid.bbox();
    if (ob.lo.x - h < gb.lo.x || ob.lo.y - h < gb.lo.y || ob.hi.x + h > gb.hi.x ||
        ob.hi.y + h > gb.hi.y)
        throw DegenerateGeometry("rasterize: grid does not cover the outer polygon plus one node");

    RegionMask mask;
    mask.grid = grid;
    mask.dirichlet_inner = v_in;
    mask.dirichlet_outer = v_out;
    mask.label.assign(grid.size(), NodeLabel::Outer);

    const RowSpans inner_spans(poly_inner, grid);
    const RowSpans outer_spans(poly_outer, grid);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            if (inner_spans.inside(grid, i, j))
                mask.label[grid.idx(i, j)] = NodeLabel::Inner;
            else if (outer_spans.inside(grid, i, j)) {
                mask.label[grid.idx(i, j)] = NodeLabel::Annulus;
                ++mask.annulus_count;
            }
        }
    if (mask.annulus_count == 0) throw EmptyAnnulus("rasterize: no annulus nodes");

    // The annulus must be a single edge-connected component.
    std::vector<char> seen(grid.size(), 0);
    std::queue<std::pair<int, int>> q;
    for (std::size_t k = 0; k < grid.size() && q.empty(); ++k)
        if (mask.label[k] == NodeLabel::Annulus) {
            q.emplace(static_cast<int>(k % grid.nx), static_cast<int>(k / grid.nx));
            seen[k] = 1;
        }
    int reached = 0;
    while (!q.empty()) {
        const auto [i, j] = q.front();
        q.pop();
        ++reached;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
            const int ii = i + di[d], jj = j + dj[d];
            if (!grid.in_bounds(ii, jj)) continue;
            const std::size_t kk = grid.idx(ii, jj);
            if (!seen[kk] && mask.label[kk] == NodeLabel::Annulus) {
                seen[kk] = 1;
                q.emplace(ii, jj);
            }
        }
    }
    if (reached != mask.annulus_count)
        throw DegenerateGeometry("rasterize: annulus is not edge-connected");
    return mask;
}

// ---------------------------------------------------- marching squares

namespace {

struct EdgeKey {
    // Grid edge carrying a crossing: axis 0 = horizontal (i,j)-(i+1,j),
    // axis 1 = vertical (i,j)-(i,j+1).
    int axis, i, j;
    bool operator<(const EdgeKey& o) const {
        if (axis != o.axis) return axis < o.axis;
        if (i != o.i) return i < o.i;
        return j < o.j;
    }
};

} // namespace

Polyline extract_level_curve(const ScalarField& field, double l) {
    const Grid2D& g = field.grid;
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -vmin;
    for (double v : field.values) {
        if (!std::isfinite(v)) continue;
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (!(vmin < vmax) && !(vmin == vmax)) throw LevelNotPresent("extract_level_curve: empty field");
    const double tie = 1e-12 * std::max(vmax - vmin, 1.0);
    const auto val = [&](int i, int j) {
        const double v = field.at(i, j);
        return v == l ? l + tie : v;
    };

    bool above = false, below = false;
    for (double v : field.values) {
        if (!std::isfinite(v)) continue;
        const double w = v == l ? l + tie : v;
        if (w > l) above = true;
        else below = true;
    }
    if (!above || !below) throw LevelNotPresent("extract_level_curve: no sign change at level");

    std::map<EdgeKey, int> edge_point;
    std::vector<Vec2> pts;
    const auto crossing = [&](EdgeKey k) {
        auto it = edge_point.find(k);
        if (it != edge_point.end()) return it->second;
        Vec2 a, b;
        double va, vb;
        if (k.axis == 0) {
            a = g.pos(k.i, k.j);
            b = g.pos(k.i + 1, k.j);
            va = val(k.i, k.j);
            vb = val(k.i + 1, k.j);
        } else {
            a = g.pos(k.i, k.j);
            b = g.pos(k.i, k.j + 1);
            va = val(k.i, k.j);
            vb = val(k.i, k.j + 1);
        }
        const double t = (l - va) / (vb - va);
        pts.push_back(a + t * (b - a));
        const int id = static_cast<int>(pts.size()) - 1;
        edge_point.emplace(k, id);
        return id;
    };

    std::vector<std::array<int, 2>> segs;
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double v00 = field.at(i, j), v10 = field.at(i + 1, j);
            const double v11 = field.at(i + 1, j + 1), v01 = field.at(i, j + 1);
            if (!std::isfinite(v00) || !std::isfinite(v10) || !std::isfinite(v11) ||
                !std::isfinite(v01))
                continue;
            int c = 0;
            if (val(i, j) > l) c |= 1;
            if (val(i + 1, j) > l) c |= 2;
            if (val(i + 1, j + 1) > l) c |= 4;
            if (val(i, j + 1) > l) c |= 8;
            if (c == 0 || c == 15) continue;

            const EdgeKey B{0, i, j}, T{0, i, j + 1}, L{1, i, j}, R{1, i + 1, j};
            const auto emit = [&](EdgeKey u, EdgeKey w) {
                segs.push_back({crossing(u), crossing(w)});
            };
            switch (c) {
                case 1: emit(L, B); break;
                case 2: emit(B, R); break;
                case 4: emit(R, T); break;
                case 8: emit(T, L); break;
                case 3: emit(L, R); break;
                case 6: emit(B, T); break;
                case 12: emit(R, L); break;
                case 9: emit(B, T); break;
                case 14: emit(L, B); break;
                case 13: emit(B, R); break;
                case 11: emit(R, T); break;
                case 7: emit(T, L); break;
                case 5: { // saddle: corners 00 and 11 above
                    const double center = 0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) +
                                                  val(i, j + 1));
                    if (center > l) {
                        emit(B, R);
                        emit(T, L);
                    } else {
                        emit(L, B);
                        emit(R, T);
                    }
                    break;
                }
                case 10: { // saddle: corners 10 and 01 above
                    const double center = 0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) +
                                                  val(i, j + 1));
                    if (center > l) {
                        emit(L, B);
                        emit(R, T);
                    } else {
                        emit(B, R);
                        emit(T, L);
                    }
                    break;
                }
                default: break;
            }
        }
    if (segs.empty()) throw LevelNotPresent("extract_level_curve: level produced no segments");

    // Assemble chains: every crossing point joins at most two segments.
    std::vector<std::array<int, 2>> incident(pts.size(), {-1, -1});
    for (std::size_t s = 0; s < segs.size(); ++s)
        for (int e = 0; e < 2; ++e) {
            auto& inc = incident[segs[s][e]];
            if (inc[0] < 0) inc[0] = static_cast<int>(s);
            else inc[1] = static_cast<int>(s);
        }

    Polyline out;
    std::vector<char> used(segs.size(), 0);
    const auto walk = [&](int start_pt, int start_seg) {
        Polyline::Chain chain;
        int p = start_pt, s = start_seg;
        chain.pts.push_back(pts[p]);
        while (s >= 0 && !used[s]) {
            used[s] = 1;
            const int q = segs[s][0] == p ? segs[s][1] : segs[s][0];
            if (q == start_pt) {
                chain.closed = true;
                break;
            }
            chain.pts.push_back(pts[q]);
            const auto& inc = incident[q];
            s = (inc[0] >= 0 && !used[inc[0]]) ? inc[0] : ((inc[1] >= 0 && !used[inc[1]]) ? inc[1] : -1);
            p = q;
        }
        return chain;
    };

    // Open chains first (endpoints with a single incident segment).
    for (std::size_t p = 0; p < pts.size(); ++p)
        if (incident[p][1] < 0 && incident[p][0] >= 0 && !used[incident[p][0]])
            out.chains.push_back(walk(static_cast<int>(p), incident[p][0]));
    // Remaining closed rings.
    for (std::size_t s = 0; s < segs.size(); ++s)
        if (!used[s]) out.chains.push_back(walk(segs[s][0], static_cast<int>(s)));

    return out;
}

} // namespace pbern
