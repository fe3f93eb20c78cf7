#include "pbern/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pbern {

BBox BBox::of(std::span<const Vec2> pts) {
    BBox b{pts.empty() ? Vec2{} : pts[0], pts.empty() ? Vec2{} : pts[0]};
    for (Vec2 p : pts) b.expand(p);
    return b;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0) return distance(p, a);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + t * ab);
}

bool Polyline::empty() const {
    for (const auto& c : chains)
        if (c.pts.size() >= 2) return false;
    return true;
}

std::size_t Polyline::segment_count() const {
    std::size_t n = 0;
    for_each_segment([&](Vec2, Vec2) { ++n; });
    return n;
}

std::vector<Vec2> Polyline::sample(double pitch) const {
    std::vector<Vec2> out;
    for_each_segment([&](Vec2 a, Vec2 b) {
        out.push_back(a);
        const double len = distance(a, b);
        const int k = static_cast<int>(std::ceil(len / pitch));
        for (int i = 1; i < k; ++i) out.push_back(a + (static_cast<double>(i) / k) * (b - a));
    });
    return out;
}

// ---------------------------------------------------------------- polygons

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) {
    verts_ = std::move(vertices);
    normalize_and_validate(true);
}

ConvexPolygon ConvexPolygon::unchecked(std::vector<Vec2> vertices) {
    ConvexPolygon p;
    p.verts_ = std::move(vertices);
    p.normalize_and_validate(false);
    return p;
}

void ConvexPolygon::normalize_and_validate(bool check_convex) {
    if (verts_.size() < 3) throw DegenerateGeometry("polygon needs at least 3 vertices");
    tol_geo_ = 1e-9 * BBox::of(verts_).diameter();

    // Merge consecutive near-duplicates (wrapping).
    std::vector<Vec2> clean;
    clean.reserve(verts_.size());
    for (Vec2 v : verts_) {
        if (clean.empty() || distance(clean.back(), v) > tol_geo_) clean.push_back(v);
    }
    while (clean.size() >= 2 && distance(clean.front(), clean.back()) <= tol_geo_) clean.pop_back();
    verts_ = std::move(clean);
    if (verts_.size() < 3) throw DegenerateGeometry("polygon degenerates to fewer than 3 vertices");

    // Enforce counterclockwise orientation.
    double a2 = 0.0;
    for (std::size_t i = 0; i < verts_.size(); ++i)
        a2 += cross(verts_[i], verts_[(i + 1) % verts_.size()]);
    if (a2 < 0.0) std::reverse(verts_.begin(), verts_.end());

    if (!check_convex) return;
    const std::size_t n = verts_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e1 = verts_[(i + 1) % n] - verts_[i];
        const Vec2 e2 = verts_[(i + 2) % n] - verts_[(i + 1) % n];
        const double c = cross(e1, e2);
        if (c < -tol_geo_ * std::max(norm(e1), norm(e2)))
            throw DegenerateGeometry("polygon is not convex within tolerance");
    }
}

double ConvexPolygon::area() const {
    double a2 = 0.0;
    for (std::size_t i = 0; i < verts_.size(); ++i)
        a2 += cross(verts_[i], verts_[(i + 1) % verts_.size()]);
    return 0.5 * a2;
}

Vec2 ConvexPolygon::centroid() const {
    // Area-weighted centroid; falls back to the vertex mean for tiny areas.
    double a2 = 0.0, cx = 0.0, cy = 0.0;
    const std::size_t n = verts_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = verts_[i], q = verts_[(i + 1) % n];
        const double w = cross(p, q);
        a2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if (std::abs(a2) < 1e-300) {
        Vec2 m{0, 0};
        for (Vec2 v : verts_) m = m + v;
        return (1.0 / n) * m;
    }
    return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

BBox ConvexPolygon::bbox() const { return BBox::of(verts_); }

bool ConvexPolygon::contains(Vec2 x, double tol) const {
    const std::size_t n = verts_.size();
    bool inside = true;
    for (std::size_t i = 0; i < n && inside; ++i) {
        const Vec2 a = verts_[i], b = verts_[(i + 1) % n];
        if (cross(b - a, x - a) < 0.0) inside = false;
    }
    if (inside) return true;
    return tol > 0.0 && boundary_distance(x) <= tol;
}

double ConvexPolygon::boundary_distance(Vec2 x) const {
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = verts_.size();
    for (std::size_t i = 0; i < n; ++i)
        d = std::min(d, point_segment_distance(x, verts_[i], verts_[(i + 1) % n]));
    return d;
}

double ConvexPolygon::signed_boundary_distance(Vec2 x) const {
    const double d = boundary_distance(x);
    return contains(x, 0.0) ? d : -d;
}

Polyline ConvexPolygon::boundary() const {
    Polyline out;
    out.chains.push_back({verts_, true});
    return out;
}

std::vector<Vec2> ConvexPolygon::sample_boundary(double pitch) const {
    return boundary().sample(pitch);
}

// ---------------------------------------------------------------- hull

ConvexPolygon convex_hull(std::span<const Vec2> points) {
    if (points.size() < 3) throw DegenerateGeometry("convex hull needs at least 3 points");
    std::vector<Vec2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    if (pts.size() < 3) throw DegenerateGeometry("convex hull of coincident points");

    const auto build = [&](auto begin, auto end) {
        std::vector<Vec2> chain;
        for (auto it = begin; it != end; ++it) {
            while (chain.size() >= 2 &&
                   cross(chain[chain.size() - 1] - chain[chain.size() - 2],
                         *it - chain[chain.size() - 2]) <= 0.0)
                chain.pop_back();
            chain.push_back(*it);
        }
        return chain;
    };
    std::vector<Vec2> lower = build(pts.begin(), pts.end());
    std::vector<Vec2> upper = build(pts.rbegin(), pts.rend());
    lower.pop_back();
    upper.pop_back();
    lower.insert(lower.end(), upper.begin(), upper.end());
    if (lower.size() < 3) throw DegenerateGeometry("points are collinear");
    return ConvexPolygon(std::move(lower));
}

// ------------------------------------------------------ minkowski combine

namespace {

// Rotate so the chain starts at the lowest (then leftmost) vertex.
std::vector<Vec2> start_at_lowest(const std::vector<Vec2>& v) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i].y < v[k].y || (v[i].y == v[k].y && v[i].x < v[k].x)) k = i;
    std::vector<Vec2> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[(k + i) % v.size()];
    return out;
}

std::vector<Vec2> scaled(const ConvexPolygon& p, double s) {
    std::vector<Vec2> out(p.vertices());
    for (Vec2& v : out) v = s * v;
    return out;
}

// Drop collinear intermediate vertices so homothetic combinations reproduce
// their operands vertex for vertex.
std::vector<Vec2> drop_collinear(std::vector<Vec2> v, double tol) {
    std::vector<Vec2> out;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 prev = v[(i + n - 1) % n], cur = v[i], next = v[(i + 1) % n];
        const double c = cross(cur - prev, next - cur);
        if (std::abs(c) > tol * std::max(norm(cur - prev), norm(next - cur)) ||
            distance(prev, next) <= tol)
            out.push_back(cur);
    }
    return out;
}

} // namespace

ConvexPolygon minkowski_combine(const ConvexPolygon& p0, const ConvexPolygon& p1, double t) {
    if (t < 0.0 || t > 1.0) throw OutOfRange("minkowski_combine: t outside [0,1]");
    if (t == 0.0) return p0;
    if (t == 1.0) return p1;

    std::vector<Vec2> a = start_at_lowest(scaled(p0, 1.0 - t));
    std::vector<Vec2> b = start_at_lowest(scaled(p1, t));
    const std::size_t na = a.size(), nb = b.size();

    std::vector<Vec2> sum;
    sum.reserve(na + nb + 1);
    Vec2 cur = a[0] + b[0];
    std::size_t i = 0, j = 0;
    while (i < na || j < nb) {
        sum.push_back(cur);
        if (i == na) {
            cur = cur + (b[(j + 1) % nb] - b[j]);
            ++j;
        } else if (j == nb) {
            cur = cur + (a[(i + 1) % na] - a[i]);
            ++i;
        } else {
            const Vec2 ea = a[(i + 1) % na] - a[i];
            const Vec2 eb = b[(j + 1) % nb] - b[j];
            const double c = cross(ea, eb);
            if (c > 0.0) {
                cur = cur + ea;
                ++i;
            } else if (c < 0.0) {
                cur = cur + eb;
                ++j;
            } else { // parallel normals: advance both at once
                cur = cur + ea + eb;
                ++i;
                ++j;
            }
        }
    }

    const double tol = 1e-9 * BBox::of(sum).diameter();
    sum = drop_collinear(std::move(sum), tol);
    if (sum.size() < 3) throw DegenerateGeometry("minkowski sum has fewer than 3 distinct normals");
    return ConvexPolygon(std::move(sum));
}

// ---------------------------------------------------------------- offsets

ConvexPolygon offset_convex(const ConvexPolygon& p, double delta) {
    if (delta == 0.0) return p;
    const auto& v = p.vertices();
    const std::size_t n = v.size();

    // Subject polygon: p itself for erosion, its expanded bbox for dilation.
    std::vector<Vec2> subject;
    if (delta < 0.0) {
        subject = v;
    } else {
        BBox b = p.bbox();
        const double m = delta * 1.5 + 1e-12;
        subject = {{b.lo.x - m, b.lo.y - m},
                   {b.hi.x + m, b.lo.y - m},
                   {b.hi.x + m, b.hi.y + m},
                   {b.lo.x - m, b.hi.y + m}};
    }

    for (std::size_t e = 0; e < n; ++e) {
        const Vec2 a = v[e], bb = v[(e + 1) % n];
        Vec2 nrm{(bb - a).y, -(bb - a).x}; // outward for CCW
        const double len = norm(nrm);
        if (len <= 0.0) continue;
        nrm = (1.0 / len) * nrm;
        const double c = dot(nrm, a) + delta;
        // Keep the half-plane n.x <= c (Sutherland-Hodgman clip).
        std::vector<Vec2> next;
        const std::size_t m = subject.size();
        for (std::size_t i = 0; i < m; ++i) {
            const Vec2 s = subject[i], q = subject[(i + 1) % m];
            const double ds = dot(nrm, s) - c, dq = dot(nrm, q) - c;
            if (ds <= 0.0) next.push_back(s);
            if ((ds < 0.0 && dq > 0.0) || (ds > 0.0 && dq < 0.0))
                next.push_back(s + (ds / (ds - dq)) * (q - s));
        }
        subject = std::move(next);
        if (subject.size() < 3) throw DegenerateGeometry("offset polygon is empty");
    }
    return ConvexPolygon(std::move(subject));
}

// ------------------------------------------------------------- distances

double distance_to_polyline(Vec2 x, const Polyline& curve) {
    if (curve.empty()) throw DegenerateGeometry("distance_to_polyline: empty curve");
    double d = std::numeric_limits<double>::infinity();
    curve.for_each_segment([&](Vec2 a, Vec2 b) { d = std::min(d, point_segment_distance(x, a, b)); });
    return d;
}

double hausdorff(const Polyline& a, const Polyline& b, double pitch) {
    if (a.empty() || b.empty()) throw DegenerateGeometry("hausdorff: empty input");
    const SegmentLocator la(a), lb(b);
    const auto directed = [&](const Polyline& from, const SegmentLocator& to) {
        double worst = 0.0;
        for (Vec2 p : from.sample(pitch)) worst = std::max(worst, to.distance(p));
        return worst;
    };
    return std::max(directed(a, lb), directed(b, la));
}

double hausdorff(const ConvexPolygon& a, const ConvexPolygon& b, double pitch) {
    return hausdorff(a.boundary(), b.boundary(), pitch);
}

double boundary_gap(const ConvexPolygon& a, const ConvexPolygon& b, double pitch) {
    const SegmentLocator lb(b.boundary());
    double best = std::numeric_limits<double>::infinity();
    for (Vec2 p : a.sample_boundary(pitch)) best = std::min(best, lb.distance(p));
    return best;
}

double inclusion_margin(const ConvexPolygon& inner, const ConvexPolygon& outer, double pitch) {
    double margin = std::numeric_limits<double>::infinity();
    for (Vec2 p : inner.sample_boundary(pitch))
        margin = std::min(margin, outer.signed_boundary_distance(p));
    return margin;
}

double inscribed_radius(const ConvexPolygon& p) {
    // Coarse-to-fine lattice search for the Chebyshev center. The reported
    // value is the depth actually achieved at a concrete center, hence a
    // valid lower bound for the true inradius.
    const auto& v = p.vertices();
    const std::size_t n = v.size();
    std::vector<Vec2> nrm(n);
    std::vector<double> off(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 e = v[(i + 1) % n] - v[i];
        Vec2 m{e.y, -e.x};
        const double len = norm(m);
        nrm[i] = (1.0 / len) * m;
        off[i] = dot(nrm[i], v[i]);
    }
    const auto depth = [&](Vec2 x) {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) d = std::min(d, off[i] - dot(nrm[i], x));
        return d;
    };

    BBox box = p.bbox();
    Vec2 best_x = p.centroid();
    double best = depth(best_x);
    double wx = box.width(), wy = box.height();
    Vec2 c{0.5 * (box.lo.x + box.hi.x), 0.5 * (box.lo.y + box.hi.y)};
    for (int round = 0; round < 6; ++round) {
        const int k = 24;
        for (int i = 0; i <= k; ++i)
            for (int j = 0; j <= k; ++j) {
                const Vec2 x{c.x - 0.5 * wx + wx * i / k, c.y - 0.5 * wy + wy * j / k};
                const double d = depth(x);
                if (d > best) {
                    best = d;
                    best_x = x;
                }
            }
        c = best_x;
        wx *= 2.5 / k;
        wy *= 2.5 / k;
    }
    return std::max(best, 0.0);
}

double enclosing_radius(const ConvexPolygon& p) {
    const Vec2 c = p.centroid();
    double r = 0.0;
    for (Vec2 v : p.vertices()) r = std::max(r, distance(c, v));
    return r;
}

ConvexPolygon make_disk(Vec2 center, double radius, int n) {
    if (radius <= 0.0 || n < 3) throw OutOfRange("make_disk: invalid radius or vertex count");
    std::vector<Vec2> v(n);
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * std::numbers::pi * i / n;
        v[i] = {center.x + radius * std::cos(a), center.y + radius * std::sin(a)};
    }
    return ConvexPolygon(std::move(v));
}

// --------------------------------------------------------- segment locator

SegmentLocator::SegmentLocator(const Polyline& curve, double cell_hint) {
    curve.for_each_segment([&](Vec2 a, Vec2 b) { segs_.push_back({a, b}); });
    if (segs_.empty()) return;

    BBox box{segs_[0][0], segs_[0][0]};
    double max_len = 0.0;
    for (const auto& s : segs_) {
        box.expand(s[0]);
        box.expand(s[1]);
        max_len = std::max(max_len, norm(s[0] - s[1]));
    }
    diam_ = std::max(box.diameter(), 1e-12);
    cell_ = cell_hint > 0.0 ? cell_hint : std::max(diam_ / 64.0, max_len);
    origin_ = box.lo;
    ncx_ = static_cast<int>(std::floor(box.width() / cell_)) + 1;
    ncy_ = static_cast<int>(std::floor(box.height() / cell_)) + 1;
    buckets_.assign(static_cast<std::size_t>(ncx_) * ncy_, {});
    for (std::size_t k = 0; k < segs_.size(); ++k) {
        const auto& s = segs_[k];
        const int i0 = static_cast<int>(std::floor((std::min(s[0].x, s[1].x) - origin_.x) / cell_));
        const int i1 = static_cast<int>(std::floor((std::max(s[0].x, s[1].x) - origin_.x) / cell_));
        const int j0 = static_cast<int>(std::floor((std::min(s[0].y, s[1].y) - origin_.y) / cell_));
        const int j1 = static_cast<int>(std::floor((std::max(s[0].y, s[1].y) - origin_.y) / cell_));
        for (int j = std::max(0, j0); j <= std::min(ncy_ - 1, j1); ++j)
            for (int i = std::max(0, i0); i <= std::min(ncx_ - 1, i1); ++i)
                buckets_[static_cast<std::size_t>(j) * ncx_ + i].push_back(static_cast<int>(k));
    }
}

double SegmentLocator::distance_within(Vec2 x, double radius) const {
    if (segs_.empty()) return radius;
    const int i0 = static_cast<int>(std::floor((x.x - radius - origin_.x) / cell_));
    const int i1 = static_cast<int>(std::floor((x.x + radius - origin_.x) / cell_));
    const int j0 = static_cast<int>(std::floor((x.y - radius - origin_.y) / cell_));
    const int j1 = static_cast<int>(std::floor((x.y + radius - origin_.y) / cell_));
    double d = std::numeric_limits<double>::infinity();
    for (int j = std::max(0, j0); j <= std::min(ncy_ - 1, j1); ++j)
        for (int i = std::max(0, i0); i <= std::min(ncx_ - 1, i1); ++i)
            for (int k : buckets_[static_cast<std::size_t>(j) * ncx_ + i])
                d = std::min(d, point_segment_distance(x, segs_[k][0], segs_[k][1]));
    return d <= radius ? d : radius;
}

double SegmentLocator::distance(Vec2 x) const {
    if (segs_.empty()) throw DegenerateGeometry("SegmentLocator: no segments");
    // Expanding search: the scanned window covers the query disk, so any
    // candidate below the radius is the true minimum.
    double r = cell_;
    const double cap = 4.0 * diam_ + norm(x - origin_) + cell_;
    while (true) {
        const double d = distance_within(x, r);
        if (d < r) return d;
        if (r > cap) {
            // Point far outside the indexed region: brute force.
            double best = std::numeric_limits<double>::infinity();
            for (const auto& s : segs_) best = std::min(best, point_segment_distance(x, s[0], s[1]));
            return best;
        }
        r *= 2.0;
    }
}

} // namespace pbern
