#pragma once

#include <string>

#include "pbern/freeboundary.hpp"

namespace pbern {

// Plain-text polygon: one "x y" pair per line, '#' comments, CCW.
ConvexPolygon read_polygon(const std::string& path);
void write_polygon(const std::string& path, const ConvexPolygon& poly,
                   const std::string& comment = "");

// CSV with header "x,y,ring_id".
void write_polyline_csv(const std::string& path, const Polyline& curve);

// CSV with header "x,y,u": one row per ANNULUS or boundary node, 17
// significant digits. Boundary nodes are Dirichlet nodes 4-adjacent to the
// annulus.
void write_field_csv(const std::string& path, const ScalarField& field, const RegionMask& mask);

// CSV "iter,hausdorff_step,condition_residual,pde_residual,annulus_nodes".
void write_trace_csv(const std::string& path, const IterationTrace& trace);

// Layered SVG overlay with a fixed viewBox mapped from the given bbox and
// stroke classes "inner", "level", "free-boundary".
struct SvgLayer {
    enum class Kind { Polygon, Curve } kind;
    std::string css_class;
    Polyline curve;      // Kind::Curve
    std::vector<Vec2> polygon; // Kind::Polygon
};

void write_svg(const std::string& path, const BBox& viewbox, const std::vector<SvgLayer>& layers);

// Locale-independent "%.17g" formatting used by every exporter.
std::string fmt_g17(double v);

} // namespace pbern
