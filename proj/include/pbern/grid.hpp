#pragma once

#include <cstddef>
#include <vector>

#include "pbern/geometry.hpp"

namespace pbern {

// Uniform node-centered grid: node (i,j) sits at origin + (i*h, j*h).
struct Grid2D {
    Vec2 origin{0, 0};
    double h = 0.0;
    int nx = 0;
    int ny = 0;

    Grid2D() = default;
    Grid2D(Vec2 origin_, double h_, int nx_, int ny_);

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    Vec2 pos(int i, int j) const { return {origin.x + i * h, origin.y + j * h}; }
    bool in_bounds(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    BBox bbox() const { return {origin, pos(nx - 1, ny - 1)}; }
};

// Smallest grid whose nodes cover box expanded by margin on every side.
Grid2D make_grid(const BBox& box, double h, double margin);

enum class NodeLabel : unsigned char { Inner, Annulus, Outer };

// Per-node classification of the ring poly_outer \ poly_inner together with
// the Dirichlet data attached to the two boundary components.
struct RegionMask {
    Grid2D grid;
    std::vector<NodeLabel> label;
    double dirichlet_inner = 0.0;
    double dirichlet_outer = 0.0;
    int annulus_count = 0;

    NodeLabel at(int i, int j) const { return label[grid.idx(i, j)]; }
};

struct ScalarField {
    Grid2D grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid2D& g, double fill = 0.0)
        : grid(g), values(g.size(), fill) {}

    double& at(int i, int j) { return values[grid.idx(i, j)]; }
    double at(int i, int j) const { return values[grid.idx(i, j)]; }
    // Bilinear interpolation; points outside the grid clamp to the border cell.
    double sample(Vec2 p) const;
};

// Classify every node of the grid against the two nested polygons and attach
// Dirichlet values. A node exactly on a boundary belongs to the enclosed set.
RegionMask rasterize(const ConvexPolygon& poly_inner, const ConvexPolygon& poly_outer,
                     const Grid2D& grid, double v_in, double v_out);

// Marching-squares contour of {field = l} with linear edge interpolation.
// Node values exactly equal to l are nudged by +1e-12 * (value range) to
// avoid degenerate topology.
Polyline extract_level_curve(const ScalarField& field, double l);

} // namespace pbern
