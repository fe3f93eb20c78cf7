#include "pbern/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "pbern/experiments.hpp"
#include "pbern/io.hpp"

namespace pbern::cli {

namespace {

namespace fs = std::filesystem;

const std::set<std::string> kKnownKeys = {
    "command",    "inner",     "outer",     "p",          "level",     "lambda",
    "lambda_expr", "omega",    "grid_h",    "out",        "convexify", "bernoulli_omega",
    "outer_tol",  "outer_max", "steps",     "t_grid",     "g",         "g_a",
    "g_alpha",    "lambda0",   "lambda1",   "N",          "R",         "grid_xmin",
    "grid_xmax",  "grid_ymin", "grid_ymax", "picard_tol", "picard_max"};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (!kKnownKeys.count(key))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

double to_num(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number from '" + value + "'");
    }
}

// Merged view of config-file values and command-line overrides.
struct Settings {
    std::map<std::string, std::string> file;
    std::map<std::string, std::string> flags;

    std::optional<std::string> raw(const std::string& key) const {
        if (auto it = flags.find(key); it != flags.end()) return it->second;
        if (auto it = file.find(key); it != file.end()) return it->second;
        return std::nullopt;
    }
    bool has(const std::string& key) const { return raw(key).has_value(); }
    std::string str(const std::string& key, const std::string& def = "") const {
        auto v = raw(key);
        return v ? *v : def;
    }
    std::string require_str(const std::string& key) const {
        auto v = raw(key);
        if (!v || v->empty()) throw ConfigError("missing required key '" + key + "'");
        return *v;
    }
    double num(const std::string& key, double def) const {
        auto v = raw(key);
        return v ? to_num(key, *v) : def;
    }
    double require_num(const std::string& key) const {
        auto v = raw(key);
        if (!v) throw ConfigError("missing required key '" + key + "'");
        return to_num(key, *v);
    }
    int integer(const std::string& key, int def) const {
        return static_cast<int>(num(key, def));
    }
    bool flag(const std::string& key, bool def) const {
        auto v = raw(key);
        if (!v) return def;
        return *v == "1" || *v == "true" || *v == "yes" || *v == "on";
    }
    std::string require_file(const std::string& key) const {
        const std::string path = require_str(key);
        if (!fs::exists(path)) throw ConfigError("missing file for key '" + key + "': " + path);
        return path;
    }
};

void validate_p(double p) {
    if (p < 1.2 || p > 8.0)
        throw ConfigError("p outside the supported CLI range [1.2, 8]");
}

void validate_level(double l) {
    if (!(0.0 < l && l < 1.0)) throw ConfigError("level must lie strictly in (0,1)");
}

// Affine distance functions "a+b*x+c*y"; affine => concave, so the
// non-constant hypothesis holds by construction.
struct AffineLambda {
    double a = 0.0, b = 0.0, c = 0.0;
    double operator()(Vec2 v) const { return a + b * v.x + c * v.y; }
};

AffineLambda parse_lambda_expr(const std::string& expr) {
    AffineLambda out;
    std::string s;
    for (char ch : expr)
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.empty()) throw ConfigError("lambda_expr: empty expression");
    std::vector<std::string> terms;
    std::string cur;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((s[i] == '+' || s[i] == '-') && i > 0 && s[i - 1] != 'e' && s[i - 1] != 'E') {
            terms.push_back(cur);
            cur.clear();
        }
        cur.push_back(s[i]);
    }
    terms.push_back(cur);
    for (const std::string& term : terms) {
        if (term.empty() || term == "+" || term == "-")
            throw ConfigError("lambda_expr: malformed term in '" + expr + "'");
        double sign = 1.0;
        std::string body = term;
        if (body[0] == '+') body.erase(0, 1);
        else if (body[0] == '-') {
            sign = -1.0;
            body.erase(0, 1);
        }
        double* slot = &out.a;
        if (body.size() >= 1 && (body.back() == 'x' || body.back() == 'y')) {
            slot = body.back() == 'x' ? &out.b : &out.c;
            body.pop_back();
            if (!body.empty() && body.back() == '*') body.pop_back();
            if (body.empty()) body = "1";
        }
        *slot += sign * to_num("lambda_expr", body);
    }
    return out;
}

DistanceSpec build_spec(const Settings& set, double grid_h, const BBox& domain) {
    const bool bernoulli_mode = set.flag("bernoulli_omega", false);
    if (set.has("lambda_expr")) {
        if (bernoulli_mode)
            throw ConfigError("bernoulli_omega requires a constant lambda");
        const AffineLambda fn = parse_lambda_expr(set.require_str("lambda_expr"));
        // Affine minimum/maximum over a box sit at its corners.
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (Vec2 corner : {domain.lo, Vec2{domain.hi.x, domain.lo.y}, domain.hi,
                            Vec2{domain.lo.x, domain.hi.y}}) {
            lo = std::min(lo, fn(corner));
            hi = std::max(hi, fn(corner));
        }
        if (lo <= 0.0)
            throw ConfigError("lambda_expr is not positive on the computational box");
        if (lo < 2.0 * grid_h) throw ConfigError("lambda_expr drops below 2h on the box");
        const double level = set.require_num("level");
        validate_level(level);
        return DistanceSpec::function(level, fn, lo, hi);
    }
    const double lambda = set.require_num("lambda");
    if (lambda <= 0.0) throw ConfigError("lambda must be positive");
    if (lambda < 2.0 * grid_h) throw ConfigError("lambda below 2h: refine the grid");
    if (bernoulli_mode) {
        const double omega = set.require_num("omega");
        if (omega <= 0.0) throw ConfigError("omega must be positive");
        validate_level(omega * lambda);
        return DistanceSpec::bernoulli(omega, lambda);
    }
    const double level = set.require_num("level");
    validate_level(level);
    return DistanceSpec::constant(level, lambda);
}

FreeBoundaryConfig build_cfg(const Settings& set, const BBox& body_box, double margin) {
    FreeBoundaryConfig cfg;
    const double h = set.num("grid_h", 1.0 / 128.0);
    if (h <= 0.0) throw ConfigError("grid_h must be positive");
    BBox box = body_box;
    if (set.has("grid_xmin")) box.lo.x = set.require_num("grid_xmin");
    if (set.has("grid_ymin")) box.lo.y = set.require_num("grid_ymin");
    if (set.has("grid_xmax")) box.hi.x = set.require_num("grid_xmax");
    if (set.has("grid_ymax")) box.hi.y = set.require_num("grid_ymax");
    cfg.grid = make_grid(box, h, margin);
    cfg.pde.p = set.num("p", 2.0);
    validate_p(cfg.pde.p);
    cfg.pde.picard_tol = set.num("picard_tol", 0.0);
    cfg.pde.picard_max = set.integer("picard_max", 200);
    cfg.outer_tol = set.num("outer_tol", 0.0);
    cfg.outer_max = set.integer("outer_max", 200);
    cfg.convexify = set.flag("convexify", true);
    return cfg;
}

fs::path prepare_out_dir(const Settings& set) {
    const fs::path dir = set.str("out", "out");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir.string());
    return dir;
}

// ------------------------------------------------------------ subcommands

int cmd_radial(const Settings& set) {
    const double p = set.num("p", 2.0);
    validate_p(p);
    const int N = set.integer("N", 2);
    const double R = set.num("R", 1.0);
    const double level = set.num("level", 0.5);
    validate_level(level);
    if (N < 2) throw ConfigError("N must be at least 2");
    if (R <= 0.0) throw ConfigError("R must be positive");

    const RadialProblem prob(p, N, 0.5 * R, R, level, 0.0, 1.0);
    std::cout << "r,Lambda\n";
    const int steps = 400;
    for (int i = 0; i <= steps; ++i) {
        const double r = R * i / steps;
        std::cout << fmt_g17(r) << ',' << fmt_g17(interior_gap(prob, r)) << "\n";
    }
    const InteriorExtremum ext = interior_extremum(prob);
    std::cout << "r_max,lambda_max,lambda_min\n"
              << fmt_g17(ext.r_max) << ',' << fmt_g17(ext.lambda_max) << ','
              << fmt_g17(ext.lambda_min) << "\n";
    return exit_ok;
}

void write_overlay(const fs::path& dir, const Grid2D& grid, const ConvexPolygon& fixed_body,
                   const ScalarField& field, double level, const ConvexPolygon& free_boundary) {
    std::vector<SvgLayer> layers;
    layers.push_back({SvgLayer::Kind::Polygon, "inner", {}, fixed_body.vertices()});
    layers.push_back({SvgLayer::Kind::Curve, "level", extract_level_curve(field, level), {}});
    layers.push_back({SvgLayer::Kind::Polygon, "free-boundary", {}, free_boundary.vertices()});
    write_svg((dir / "overlay.svg").string(), grid.bbox(), layers);
}

int cmd_solve_exterior(const Settings& set) {
    const ConvexPolygon K = read_polygon(set.require_file("inner"));
    const double h = set.num("grid_h", 1.0 / 128.0);
    const double p = set.num("p", 2.0);
    validate_p(p);

    // Starting boundary: explicit polygon or a radial supersolution disk.
    std::optional<ConvexPolygon> omega0;
    if (set.has("outer")) omega0 = read_polygon(set.require_file("outer"));

    // A preliminary lambda bound for sizing the box before the grid exists.
    double lambda_hint;
    if (set.has("lambda_expr")) {
        const AffineLambda fn = parse_lambda_expr(set.require_str("lambda_expr"));
        BBox kb = K.bbox();
        const double pad = 2.0 * enclosing_radius(K) + 1.0;
        lambda_hint = 0.0;
        for (Vec2 corner : {Vec2{kb.lo.x - pad, kb.lo.y - pad}, Vec2{kb.hi.x + pad, kb.lo.y - pad},
                            Vec2{kb.hi.x + pad, kb.hi.y + pad}, Vec2{kb.lo.x - pad, kb.hi.y + pad}})
            lambda_hint = std::max(lambda_hint, fn(corner));
    } else {
        lambda_hint = set.require_num("lambda");
    }
    if (lambda_hint <= 0.0) throw ConfigError("lambda must be positive");
    if (!omega0) {
        const Vec2 c = K.centroid();
        double r_enc = 0.0;
        for (Vec2 v : K.vertices()) r_enc = std::max(r_enc, distance(c, v));
        double level_hint = set.num("level", 0.5);
        if (set.flag("bernoulli_omega", false))
            level_hint = std::min(set.require_num("omega") * lambda_hint, 0.95);
        omega0 = make_disk(c, solve_exterior_radius(p, 2, r_enc, level_hint, 1.5 * lambda_hint), 128);
    }

    BBox box = omega0->bbox();
    const FreeBoundaryConfig cfg = build_cfg(set, box, 6.0 * h + 0.25 * lambda_hint);
    const DistanceSpec spec = build_spec(set, cfg.grid.h, cfg.grid.bbox());

    const FreeBoundaryResult res = iterate_exterior(K, spec, cfg, *omega0);
    const ConditionReport cond = check_distance_condition(res.field, res.boundary, spec);

    const fs::path dir = prepare_out_dir(set);
    write_polygon((dir / "boundary.txt").string(), res.boundary, "free boundary (exterior)");
    write_trace_csv((dir / "trace.csv").string(), res.trace);
    const RegionMask mask = rasterize(K, res.boundary, cfg.grid, 1.0, 0.0);
    write_field_csv((dir / "field.csv").string(), res.field, mask);
    write_polyline_csv((dir / "level_curve.csv").string(), extract_level_curve(res.field, spec.l));
    write_overlay(dir, cfg.grid, K, res.field, spec.l, res.boundary);

    std::cout << "converged=" << (res.trace.converged ? 1 : 0)
              << " iterations=" << res.trace.rows.size()
              << " condition_residual=" << fmt_g17(cond.max_residual) << "\n";
    return exit_ok;
}

int cmd_solve_interior(const Settings& set) {
    const ConvexPolygon Omega = read_polygon(set.require_file("outer"));
    const double h = set.num("grid_h", 1.0 / 128.0);
    const FreeBoundaryConfig cfg = build_cfg(set, Omega.bbox(), 4.0 * h);
    const DistanceSpec spec = build_spec(set, cfg.grid.h, cfg.grid.bbox());
    if (spec.variable) throw ConfigError("solve-interior supports constant lambda only");

    const FreeBoundaryResult res = iterate_interior(Omega, spec, cfg);
    const ConditionReport cond = check_distance_condition(res.field, res.boundary, spec);

    const fs::path dir = prepare_out_dir(set);
    write_polygon((dir / "boundary.txt").string(), res.boundary, "free boundary (interior)");
    write_trace_csv((dir / "trace.csv").string(), res.trace);
    const RegionMask mask = rasterize(res.boundary, Omega, cfg.grid, 0.0, 1.0);
    write_field_csv((dir / "field.csv").string(), res.field, mask);
    write_polyline_csv((dir / "level_curve.csv").string(), extract_level_curve(res.field, spec.l));
    write_overlay(dir, cfg.grid, Omega, res.field, spec.l, res.boundary);

    std::cout << "converged=" << (res.trace.converged ? 1 : 0)
              << " iterations=" << res.trace.rows.size()
              << " condition_residual=" << fmt_g17(cond.max_residual) << "\n";
    return exit_ok;
}

int cmd_lambda_max(const Settings& set) {
    const ConvexPolygon Omega = read_polygon(set.require_file("outer"));
    const double h = set.num("grid_h", 1.0 / 128.0);
    const double p = set.num("p", 2.0);
    validate_p(p);
    const double level = set.require_num("level");
    validate_level(level);
    const FreeBoundaryConfig cfg = build_cfg(set, Omega.bbox(), 4.0 * h);

    const double estimate = estimate_lambda_max(Omega, level, p, cfg);
    const fs::path dir = prepare_out_dir(set);
    std::ofstream out(dir / "lambda_max.txt");
    out << fmt_g17(estimate) << "\n";
    std::cout << "lambda_max=" << fmt_g17(estimate) << "\n";
    return exit_ok;
}

int cmd_converge_bernoulli(const Settings& set) {
    const ConvexPolygon K = read_polygon(set.require_file("inner"));
    const double omega = set.require_num("omega");
    const double lambda0 = set.require_num("lambda");
    const int steps = set.integer("steps", 3);
    const double h = set.num("grid_h", 1.0 / 128.0);
    const FreeBoundaryConfig cfg = build_cfg(set, K.bbox(), 4.0 * h);

    const BernoulliReport report = run_converge_bernoulli(K, omega, lambda0, steps, cfg);
    if (report.truncated > 0)
        std::cerr << "warning: truncated " << report.truncated << " steps with lambda below 2h\n";

    const fs::path dir = prepare_out_dir(set);
    std::ofstream out(dir / "report.csv");
    out << "n,lambda,l,ghat,hausdorff_prev,max_outside\n";
    for (const auto& s : report.steps) {
        out << s.n << ',' << fmt_g17(s.lambda) << ',' << fmt_g17(s.l) << ',' << fmt_g17(s.ghat)
            << ',' << fmt_g17(s.hausdorff_prev) << ',' << fmt_g17(s.max_outside) << "\n";
        write_polygon((dir / ("boundary_" + std::to_string(s.n) + ".txt")).string(), s.boundary,
                      "lambda=" + fmt_g17(s.lambda));
    }
    std::cout << "steps=" << report.steps.size()
              << " final_ghat=" << fmt_g17(report.steps.back().ghat) << " omega=" << fmt_g17(omega)
              << "\n";
    return exit_ok;
}

int cmd_two_phase(const Settings& set) {
    const ConvexPolygon K1 = read_polygon(set.require_file("inner"));
    const ConvexPolygon K3 = read_polygon(set.require_file("outer"));
    const double p = set.num("p", 2.0);
    validate_p(p);
    const double level = set.require_num("level");
    validate_level(level);
    const double h = set.num("grid_h", 1.0 / 128.0);
    const FreeBoundaryConfig cfg = build_cfg(set, K3.bbox(), 4.0 * h);

    JoiningFunction g;
    const std::string gname = set.str("g", "symmetric");
    if (gname == "symmetric") {
        g = JoiningFunction::symmetric();
    } else if (gname == "classic") {
        const double a = set.num("g_a", 1.0);
        const double alpha = set.num("g_alpha", 1.0);
        if (a <= 0.0) throw ConfigError("g_a must be positive");
        g = JoiningFunction::classic([a](Vec2) { return a; }, alpha);
    } else {
        throw ConfigError("unknown joining function '" + gname + "' (symmetric|classic)");
    }

    const TwoPhaseResult res = two_phase_iterate(K1, K3, g, level, p, cfg);

    const fs::path dir = prepare_out_dir(set);
    write_polygon((dir / "interface.txt").string(), res.interface, "two-phase interface K2");
    write_trace_csv((dir / "trace.csv").string(), res.trace);
    const RegionMask mask1 = rasterize(K1, res.interface, cfg.grid, 1.0, 0.0);
    const RegionMask mask2 = rasterize(res.interface, K3, cfg.grid, 0.0, -1.0);
    write_field_csv((dir / "field_inner.csv").string(), res.field_inner, mask1);
    write_field_csv((dir / "field_outer.csv").string(), res.field_outer, mask2);
    std::vector<SvgLayer> layers;
    layers.push_back({SvgLayer::Kind::Polygon, "inner", {}, K1.vertices()});
    layers.push_back({SvgLayer::Kind::Polygon, "inner", {}, K3.vertices()});
    layers.push_back(
        {SvgLayer::Kind::Curve, "level", extract_level_curve(res.field_inner, level), {}});
    layers.push_back(
        {SvgLayer::Kind::Curve, "level", extract_level_curve(res.field_outer, -level), {}});
    layers.push_back({SvgLayer::Kind::Polygon, "free-boundary", {}, res.interface.vertices()});
    write_svg((dir / "overlay.svg").string(), cfg.grid.bbox(), layers);

    std::cout << "converged=" << (res.trace.converged ? 1 : 0)
              << " max_G=" << fmt_g17(res.trace.rows.back().condition_residual)
              << " separation_ratio=" << fmt_g17(res.separation_ratio) << "\n";
    return exit_ok;
}

int cmd_brunn_minkowski(const Settings& set) {
    const ConvexPolygon Omega0 = read_polygon(set.require_file("inner"));
    const ConvexPolygon Omega1 = read_polygon(set.require_file("outer"));
    const double p = set.num("p", 2.0);
    validate_p(p);
    const double level = set.require_num("level");
    validate_level(level);
    const double h = set.num("grid_h", 1.0 / 128.0);

    std::vector<double> t_grid;
    std::stringstream ss(set.str("t_grid", "0.25,0.5,0.75"));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!trim(tok).empty()) t_grid.push_back(to_num("t_grid", trim(tok)));
    }
    if (t_grid.empty()) throw ConfigError("t_grid is empty");

    FreeBoundaryConfig cfg = build_cfg(set, Omega0.bbox(), 4.0 * h);
    const BrunnMinkowskiReport report = run_brunn_minkowski(
        Omega0, Omega1, level, p, t_grid, cfg, set.num("lambda0", 0.0), set.num("lambda1", 0.0));

    const fs::path dir = prepare_out_dir(set);
    std::ofstream out(dir / "report.csv");
    out << "t,lambda_hat,deficit,inclusion_margin\n";
    for (const auto& r : report.rows)
        out << fmt_g17(r.t) << ',' << fmt_g17(r.lambda_hat) << ',' << fmt_g17(r.deficit) << ','
            << fmt_g17(r.inclusion_margin) << "\n";
    std::cout << "lambda_hat0=" << fmt_g17(report.lambda_hat0)
              << " lambda_hat1=" << fmt_g17(report.lambda_hat1) << " rows=" << report.rows.size()
              << "\n";
    return exit_ok;
}

int dispatch(const std::string& command, const Settings& set) {
    if (command == "radial") return cmd_radial(set);
    if (command == "solve-exterior") return cmd_solve_exterior(set);
    if (command == "solve-interior") return cmd_solve_interior(set);
    if (command == "lambda-max") return cmd_lambda_max(set);
    if (command == "converge-bernoulli") return cmd_converge_bernoulli(set);
    if (command == "two-phase") return cmd_two_phase(set);
    if (command == "brunn-minkowski") return cmd_brunn_minkowski(set);
    throw ConfigError("unknown command '" + command + "'");
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const GridTooCoarse& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const OutOfRange& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return exit_config;
    } catch (const NonConvergence& e) {
        std::cerr << "non-convergence: " << e.what() << " (iterations=" << e.iterations
                  << ", residual=" << e.residual << ")\n";
        return exit_nonconvergence;
    } catch (const LambdaTooLarge& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const EmptyAnnulus& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const DegenerateGeometry& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const LevelNotPresent& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_nonconvergence;
    }
}

} // namespace

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 0; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"Discrete Bernoulli free boundary solver for the p-Laplacian"};
    app.require_subcommand(0, 1);

    std::string config_path, inner_path, outer_path, out_dir, lambda_expr, gname, t_grid_s;
    double p = NAN, level = NAN, lambda = NAN, omega = NAN, grid_h = NAN, g_a = NAN, g_alpha = NAN;
    double R = NAN, outer_tol = NAN, lambda0 = NAN, lambda1 = NAN;
    int steps = -1, N = -1, outer_max = -1;
    bool no_convexify = false, bernoulli_omega = false;

    const auto add_shared = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key=value config file");
        sub->add_option("--grid-h", grid_h, "grid spacing");
        sub->add_option("--p", p, "p-Laplacian exponent, CLI range [1.2, 8]");
        sub->add_option("--level", level, "level l in (0,1)");
        sub->add_option("--lambda", lambda, "distance constraint");
        sub->add_option("--omega", omega, "Bernoulli gradient constant");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--no-convexify", no_convexify, "skip the convex hull step");
        sub->add_flag("--bernoulli-omega", bernoulli_omega, "derive l = omega*lambda");
        sub->add_option("--inner", inner_path, "inner polygon file");
        sub->add_option("--outer", outer_path, "outer polygon file");
        sub->add_option("--outer-tol", outer_tol, "Hausdorff stopping tolerance");
        sub->add_option("--outer-max", outer_max, "outer iteration cap");
        return sub;
    };

    CLI::App* s_radial = add_shared(app.add_subcommand("radial", "radial closed forms sweep"));
    s_radial->add_option("--N", N, "dimension");
    s_radial->add_option("--R", R, "outer radius");
    CLI::App* s_ext = add_shared(app.add_subcommand("solve-exterior", "exterior problem"));
    s_ext->add_option("--lambda-expr", lambda_expr, "affine lambda(x): a+b*x+c*y");
    add_shared(app.add_subcommand("solve-interior", "interior problem"));
    add_shared(app.add_subcommand("lambda-max", "estimate the Bernoulli constant"));
    CLI::App* s_cb =
        add_shared(app.add_subcommand("converge-bernoulli", "lambda -> 0 convergence study"));
    s_cb->add_option("--steps", steps, "number of halvings");
    CLI::App* s_tp = add_shared(app.add_subcommand("two-phase", "two-phase joining condition"));
    s_tp->add_option("--g", gname, "joining function: symmetric|classic");
    s_tp->add_option("--g-a", g_a, "classic g: constant a");
    s_tp->add_option("--g-alpha", g_alpha, "classic g: exponent alpha");
    CLI::App* s_bm =
        add_shared(app.add_subcommand("brunn-minkowski", "Brunn-Minkowski inequality check"));
    s_bm->add_option("--t-grid", t_grid_s, "comma-separated t values");
    s_bm->add_option("--lambda0", lambda0, "lambda for Omega0");
    s_bm->add_option("--lambda1", lambda1, "lambda for Omega1");
    app.add_option("--config", config_path, "flat key=value config file with a 'command' key");

    try {
        std::vector<std::string> rest(args.begin() + 1, args.end());
        std::reverse(rest.begin(), rest.end());
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    return guarded([&]() -> int {
        Settings set;
        if (!config_path.empty()) set.file = parse_config_file(config_path);

        const auto put_num = [&](const char* key, double v) {
            if (!std::isnan(v)) set.flags[key] = fmt_g17(v);
        };
        const auto put_int = [&](const char* key, int v) {
            if (v >= 0) set.flags[key] = std::to_string(v);
        };
        const auto put_str = [&](const char* key, const std::string& v) {
            if (!v.empty()) set.flags[key] = v;
        };
        put_num("p", p);
        put_num("level", level);
        put_num("lambda", lambda);
        put_num("omega", omega);
        put_num("grid_h", grid_h);
        put_num("g_a", g_a);
        put_num("g_alpha", g_alpha);
        put_num("R", R);
        put_num("outer_tol", outer_tol);
        put_num("lambda0", lambda0);
        put_num("lambda1", lambda1);
        put_int("steps", steps);
        put_int("N", N);
        put_int("outer_max", outer_max);
        put_str("inner", inner_path);
        put_str("outer", outer_path);
        put_str("out", out_dir);
        put_str("lambda_expr", lambda_expr);
        put_str("g", gname);
        put_str("t_grid", t_grid_s);
        if (no_convexify) set.flags["convexify"] = "0";
        if (bernoulli_omega) set.flags["bernoulli_omega"] = "1";

        std::string command;
        for (CLI::App* sub : app.get_subcommands()) command = sub->get_name();
        if (command.empty()) {
            if (auto c = set.raw("command")) command = *c;
            else throw ConfigError("no subcommand given and no 'command' key in config");
        }
        return dispatch(command, set);
    });
}

int run_config(const std::string& path) {
    return guarded([&]() -> int {
        Settings set;
        set.file = parse_config_file(path);
        const std::string command = set.require_str("command");
        return dispatch(command, set);
    });
}

} // namespace pbern::cli
