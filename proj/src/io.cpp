#include "pbern/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace pbern {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string fmt_g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

} // namespace

ConvexPolygon read_polygon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open polygon file: " + path);
    std::vector<Vec2> pts;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        double x, y;
        if (ss >> x >> y) {
            pts.push_back({x, y});
            double extra;
            if (ss >> extra)
                throw IoError(path + ":" + std::to_string(lineno) + ": expected 'x y'");
        } else {
            std::string word;
            std::istringstream chk(line);
            if (chk >> word)
                throw IoError(path + ":" + std::to_string(lineno) + ": expected 'x y'");
        }
    }
    if (pts.size() < 3) throw DegenerateGeometry("polygon file has fewer than 3 vertices: " + path);
    return ConvexPolygon(std::move(pts));
}

void write_polygon(const std::string& path, const ConvexPolygon& poly, const std::string& comment) {
    auto out = open_out(path);
    if (!comment.empty()) out << "# " << comment << "\n";
    for (Vec2 v : poly.vertices()) out << fmt_g17(v.x) << ' ' << fmt_g17(v.y) << "\n";
}

void write_polyline_csv(const std::string& path, const Polyline& curve) {
    auto out = open_out(path);
    out << "x,y,ring_id\n";
    int ring = 0;
    for (const auto& c : curve.chains) {
        for (Vec2 p : c.pts) out << fmt_g17(p.x) << ',' << fmt_g17(p.y) << ',' << ring << "\n";
        ++ring;
    }
}

void write_field_csv(const std::string& path, const ScalarField& field, const RegionMask& mask) {
    auto out = open_out(path);
    out << "x,y,u\n";
    const Grid2D& g = mask.grid;
    const auto is_boundary = [&](int i, int j) {
        if (mask.at(i, j) == NodeLabel::Annulus) return true;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
            const int ii = i + di[d], jj = j + dj[d];
            if (g.in_bounds(ii, jj) && mask.at(ii, jj) == NodeLabel::Annulus) return true;
        }
        return false;
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!is_boundary(i, j)) continue;
            const Vec2 p = g.pos(i, j);
            out << fmt_g17(p.x) << ',' << fmt_g17(p.y) << ',' << fmt_g17(field.at(i, j)) << "\n";
        }
}

void write_trace_csv(const std::string& path, const IterationTrace& trace) {
    auto out = open_out(path);
    out << "iter,hausdorff_step,condition_residual,pde_residual,annulus_nodes\n";
    int n = 1;
    for (const auto& r : trace.rows) {
        out << n++ << ',' << fmt_g17(r.hausdorff_step) << ',' << fmt_g17(r.condition_residual)
            << ',' << fmt_g17(r.pde_residual) << ',' << r.annulus_nodes << "\n";
    }
}

void write_svg(const std::string& path, const BBox& viewbox, const std::vector<SvgLayer>& layers) {
    auto out = open_out(path);
    const double w = viewbox.width(), hh = viewbox.height();
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt_g6(viewbox.lo.x) << ' '
        << fmt_g6(-viewbox.hi.y) << ' ' << fmt_g6(w) << ' ' << fmt_g6(hh) << "\">\n";
    out << "<style>\n"
        << ".inner{stroke:#1f77b4;fill:none}\n"
        << ".level{stroke:#2ca02c;fill:none;stroke-dasharray:" << fmt_g6(w / 100.0) << "}\n"
        << ".free-boundary{stroke:#d62728;fill:none}\n"
        << "path,polygon,polyline{stroke-width:" << fmt_g6(w / 300.0) << "}\n"
        << "text{font-size:" << fmt_g6(w / 30.0) << "px;font-family:sans-serif}\n"
        << "</style>\n";
    // Flip y so the mathematical orientation matches the screen.
    out << "<g transform=\"scale(1,-1)\">\n";
    for (const auto& layer : layers) {
        if (layer.kind == SvgLayer::Kind::Polygon) {
            out << "<polygon class=\"" << layer.css_class << "\" points=\"";
            for (Vec2 p : layer.polygon) out << fmt_g6(p.x) << ',' << fmt_g6(p.y) << ' ';
            out << "\"/>\n";
        } else {
            for (const auto& c : layer.curve.chains) {
                if (c.pts.size() < 2) continue;
                out << (c.closed ? "<polygon" : "<polyline") << " class=\"" << layer.css_class
                    << "\" points=\"";
                for (Vec2 p : c.pts) out << fmt_g6(p.x) << ',' << fmt_g6(p.y) << ' ';
                out << "\"/>\n";
            }
        }
    }
    out << "</g>\n";
    // Legend.
    const double ty = -viewbox.hi.y + hh * 0.05;
    const std::pair<const char*, const char*> entries[] = {
        {"inner", "#1f77b4"}, {"level", "#2ca02c"}, {"free-boundary", "#d62728"}};
    int idx = 0;
    for (const auto& [cls, color] : entries) {
        out << "<text x=\"" << fmt_g6(viewbox.lo.x + w * 0.02) << "\" y=\""
            << fmt_g6(ty + idx * hh * 0.045) << "\" fill=\"" << color << "\">" << cls
            << "</text>\n";
        ++idx;
    }
    out << "</svg>\n";
}

} // namespace pbern
