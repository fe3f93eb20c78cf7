#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "pbern/errors.hpp"

namespace pbern {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct BBox {
    Vec2 lo{0, 0};
    Vec2 hi{0, 0};

    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double diameter() const { return std::hypot(width(), height()); }
    void expand(Vec2 p) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    static BBox of(std::span<const Vec2> pts);
};

// Exact distance from a point to the segment [a,b].
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

// A set of polygonal chains extracted from a grid field. Chains produced by
// the level-curve extractor have their endpoints on grid cell edges; a chain
// is a closed ring unless the curve ran into the grid border.
struct Polyline {
    struct Chain {
        std::vector<Vec2> pts;
        bool closed = false;
    };
    std::vector<Chain> chains;

    bool empty() const;
    std::size_t segment_count() const;
    // Visit every segment of every chain.
    template <typename F>
    void for_each_segment(F&& f) const {
        for (const auto& c : chains) {
            if (c.pts.size() < 2) continue;
            for (std::size_t i = 0; i + 1 < c.pts.size(); ++i) f(c.pts[i], c.pts[i + 1]);
            if (c.closed) f(c.pts.back(), c.pts.front());
        }
    }
    // Points spaced at most `pitch` apart along every chain.
    std::vector<Vec2> sample(double pitch) const;
};

// Convex polygon with counterclockwise vertices. Construction normalizes
// orientation, drops near-duplicate consecutive vertices and rejects
// non-convex input (cross products below -tol_geo, with
// tol_geo = 1e-9 * bbox diameter).
class ConvexPolygon {
public:
    explicit ConvexPolygon(std::vector<Vec2> vertices);

    // Skips the convexity check; used by the star-shaped experimental mode
    // where the traced boundary is returned as-is.
    static ConvexPolygon unchecked(std::vector<Vec2> vertices);

    const std::vector<Vec2>& vertices() const { return verts_; }
    std::size_t size() const { return verts_.size(); }

    double area() const;
    Vec2 centroid() const;
    BBox bbox() const;
    double tol_geo() const { return tol_geo_; }

    // True iff x lies inside (boundary inclusive) or within tol of the boundary.
    bool contains(Vec2 x, double tol) const;
    // Euclidean distance from x to the boundary.
    double boundary_distance(Vec2 x) const;
    // boundary_distance signed positive inside, negative outside.
    double signed_boundary_distance(Vec2 x) const;

    // Boundary as a single closed chain.
    Polyline boundary() const;
    // Points along the boundary spaced at most `pitch` apart.
    std::vector<Vec2> sample_boundary(double pitch) const;

private:
    ConvexPolygon() = default;
    void normalize_and_validate(bool check_convex);
    std::vector<Vec2> verts_;
    double tol_geo_ = 0.0;
};

// Counterclockwise hull of a point set; throws DegenerateGeometry if all
// points are collinear.
ConvexPolygon convex_hull(std::span<const Vec2> points);

// Minkowski combination (1-t)*P0 + t*P1 via merged edge-normal ordering.
ConvexPolygon minkowski_combine(const ConvexPolygon& p0, const ConvexPolygon& p1, double t);

// Inner (delta < 0) or outer (delta > 0) parallel body obtained by shifting
// every edge line by |delta|. For delta < 0 this is the exact erosion of the
// convex polygon by a disk of radius |delta|.
ConvexPolygon offset_convex(const ConvexPolygon& p, double delta);

// Minimum distance from x to the union of segments of the curve.
double distance_to_polyline(Vec2 x, const Polyline& curve);

// Symmetric Hausdorff distance via dense edge sampling at the given pitch;
// distances from samples to the other curve are exact.
double hausdorff(const Polyline& a, const Polyline& b, double pitch);
double hausdorff(const ConvexPolygon& a, const ConvexPolygon& b, double pitch);

// Minimum distance between the boundaries of two polygons.
double boundary_gap(const ConvexPolygon& a, const ConvexPolygon& b, double pitch);

// min over samples of the boundary of `inner` of signed_boundary_distance to
// `outer`: positive when inner sits strictly inside outer, negative by the
// largest violation otherwise.
double inclusion_margin(const ConvexPolygon& inner, const ConvexPolygon& outer, double pitch);

// Radius of a large inscribed ball (never larger than the true inradius) and
// radius of the enclosing ball centered at the centroid.
double inscribed_radius(const ConvexPolygon& p);
double enclosing_radius(const ConvexPolygon& p);

// Regular n-gon approximation of a disk, counterclockwise.
ConvexPolygon make_disk(Vec2 center, double radius, int n = 64);

// Spatial index over the segments of a polyline for fast distance queries.
class SegmentLocator {
public:
    SegmentLocator() = default;
    explicit SegmentLocator(const Polyline& curve, double cell_hint = 0.0);

    bool empty() const { return segs_.empty(); }
    // Exact distance when it is < radius, otherwise returns radius
    // (a valid lower bound).
    double distance_within(Vec2 x, double radius) const;
    // Exact distance via expanding search.
    double distance(Vec2 x) const;

private:
    std::vector<std::array<Vec2, 2>> segs_;
    std::vector<std::vector<int>> buckets_;
    Vec2 origin_{0, 0};
    double cell_ = 1.0;
    int ncx_ = 0, ncy_ = 0;
    double diam_ = 0.0;
};

} // namespace pbern
