#include "pbern/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pbern {

namespace {

// Edge-coefficient sweep shared by the solver and the residual. Coefficients
// live on the horizontal edge (i,j)-(i+1,j) and the vertical edge
// (i,j)-(i,j+1); only edges with at least one annulus endpoint are used.
struct EdgeCoeffs {
    std::vector<double> h_edges; // (nx-1) * ny
    std::vector<double> v_edges; // nx * (ny-1)
    int nx, ny;

    double& he(int i, int j) { return h_edges[static_cast<std::size_t>(j) * (nx - 1) + i]; }
    double he(int i, int j) const { return h_edges[static_cast<std::size_t>(j) * (nx - 1) + i]; }
    double& ve(int i, int j) { return v_edges[static_cast<std::size_t>(j) * nx + i]; }
    double ve(int i, int j) const { return v_edges[static_cast<std::size_t>(j) * nx + i]; }
};

// Derivative along y at node (i,j): central where possible, one-sided at the
// grid border.
double dy_at(const ScalarField& u, int i, int j) {
    const Grid2D& g = u.grid;
    const double h = g.h;
    if (j > 0 && j + 1 < g.ny) return (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * h);
    if (j + 1 < g.ny) return (u.at(i, j + 1) - u.at(i, j)) / h;
    if (j > 0) return (u.at(i, j) - u.at(i, j - 1)) / h;
    return 0.0;
}

double dx_at(const ScalarField& u, int i, int j) {
    const Grid2D& g = u.grid;
    const double h = g.h;
    if (i > 0 && i + 1 < g.nx) return (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * h);
    if (i + 1 < g.nx) return (u.at(i + 1, j) - u.at(i, j)) / h;
    if (i > 0) return (u.at(i, j) - u.at(i - 1, j)) / h;
    return 0.0;
}

void compute_coefficients(const ScalarField& u, const RegionMask& mask, double p, double eps,
                          EdgeCoeffs& co) {
    const Grid2D& g = u.grid;
    const double h = g.h;
    const bool linear = p == 2.0;
    const double expo = 0.5 * (p - 2.0);
    co.nx = g.nx;
    co.ny = g.ny;
    co.h_edges.assign(static_cast<std::size_t>(g.nx - 1) * g.ny, 0.0);
    co.v_edges.assign(static_cast<std::size_t>(g.nx) * (g.ny - 1), 0.0);

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            if (mask.at(i, j) != NodeLabel::Annulus && mask.at(i + 1, j) != NodeLabel::Annulus)
                continue;
            if (linear) {
                co.he(i, j) = 1.0;
                continue;
            }
            const double un = (u.at(i + 1, j) - u.at(i, j)) / h;
            const double ut = 0.5 * (dy_at(u, i, j) + dy_at(u, i + 1, j));
            co.he(i, j) = std::pow(un * un + ut * ut + eps * eps, expo);
        }
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (mask.at(i, j) != NodeLabel::Annulus && mask.at(i, j + 1) != NodeLabel::Annulus)
                continue;
            if (linear) {
                co.ve(i, j) = 1.0;
                continue;
            }
            const double un = (u.at(i, j + 1) - u.at(i, j)) / h;
            const double ut = 0.5 * (dx_at(u, i, j) + dx_at(u, i, j + 1));
            co.ve(i, j) = std::pow(un * un + ut * ut + eps * eps, expo);
        }
}

double residual_with(const ScalarField& u, const RegionMask& mask, const EdgeCoeffs& co) {
    const Grid2D& g = u.grid;
    const double inv_h2 = 1.0 / (g.h * g.h);
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (mask.at(i, j) != NodeLabel::Annulus) continue;
            const double uc = u.at(i, j);
            double flux = 0.0;
            flux += co.he(i, j) * (u.at(i + 1, j) - uc);
            flux += co.he(i - 1, j) * (u.at(i - 1, j) - uc);
            flux += co.ve(i, j) * (u.at(i, j + 1) - uc);
            flux += co.ve(i, j - 1) * (u.at(i, j - 1) - uc);
            worst = std::max(worst, std::abs(flux) * inv_h2);
        }
    return worst;
}

// SGS-preconditioned conjugate gradients on the annulus unknowns.
struct LinearSystem {
    const RegionMask& mask;
    const EdgeCoeffs& co;
    std::vector<int> unknown_of;   // grid idx -> unknown idx or -1
    std::vector<int> node_of;      // unknown idx -> grid idx
    std::vector<double> diag;
    std::vector<double> b;

    LinearSystem(const RegionMask& m, const EdgeCoeffs& c, const ScalarField& u)
        : mask(m), co(c) {
        const Grid2D& g = m.grid;
        unknown_of.assign(g.size(), -1);
        node_of.reserve(m.annulus_count);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (m.label[k] == NodeLabel::Annulus) {
                unknown_of[k] = static_cast<int>(node_of.size());
                node_of.push_back(static_cast<int>(k));
            }
        const int n = static_cast<int>(node_of.size());
        diag.assign(n, 0.0);
        b.assign(n, 0.0);
        for (int u_i = 0; u_i < n; ++u_i) {
            const int k = node_of[u_i];
            const int i = k % g.nx, j = k / g.nx;
            const double sw = co.he(i - 1, j), se = co.he(i, j);
            const double ss = co.ve(i, j - 1), sn = co.ve(i, j);
            diag[u_i] = sw + se + ss + sn;
            const auto add_dirichlet = [&](int ii, int jj, double sigma) {
                if (mask.at(ii, jj) != NodeLabel::Annulus) b[u_i] += sigma * u.at(ii, jj);
            };
            add_dirichlet(i - 1, j, sw);
            add_dirichlet(i + 1, j, se);
            add_dirichlet(i, j - 1, ss);
            add_dirichlet(i, j + 1, sn);
        }
    }

    // Neighbor unknowns and coefficients of row u_i.
    template <typename F>
    void off_diag(int u_i, F&& f) const {
        const Grid2D& g = mask.grid;
        const int k = node_of[u_i];
        const int i = k % g.nx, j = k / g.nx;
        const auto visit = [&](int ii, int jj, double sigma) {
            const int u_j = unknown_of[g.idx(ii, jj)];
            if (u_j >= 0 && sigma != 0.0) f(u_j, sigma);
        };
        visit(i - 1, j, co.he(i - 1, j));
        visit(i + 1, j, co.he(i, j));
        visit(i, j - 1, co.ve(i, j - 1));
        visit(i, j + 1, co.ve(i, j));
    }

    void matvec(const std::vector<double>& x, std::vector<double>& y) const {
        const int n = static_cast<int>(node_of.size());
        for (int u_i = 0; u_i < n; ++u_i) {
            double acc = diag[u_i] * x[u_i];
            off_diag(u_i, [&](int u_j, double s) { acc -= s * x[u_j]; });
            y[u_i] = acc;
        }
    }

    // Symmetric Gauss-Seidel preconditioner z = (D+U)^-1 D (D+L)^-1 r; the
    // unknown ordering is row-major so the lower triangle holds west/south
    // neighbors.
    void precondition(const std::vector<double>& r, std::vector<double>& z,
                      std::vector<double>& tmp) const {
        const int n = static_cast<int>(node_of.size());
        for (int u_i = 0; u_i < n; ++u_i) {
            double acc = r[u_i];
            off_diag(u_i, [&](int u_j, double s) {
                if (u_j < u_i) acc += s * tmp[u_j];
            });
            tmp[u_i] = acc / diag[u_i];
        }
        for (int u_i = n - 1; u_i >= 0; --u_i) {
            double acc = diag[u_i] * tmp[u_i];
            off_diag(u_i, [&](int u_j, double s) {
                if (u_j > u_i) acc += s * z[u_j];
            });
            z[u_i] = acc / diag[u_i];
        }
    }

    // Returns achieved relative residual. Stops at the relative target or at
    // the absolute 2-norm floor, whichever is weaker.
    double solve_cg(std::vector<double>& x, double tol, int max_iter, double abs_tol = 0.0) const {
        const int n = static_cast<int>(node_of.size());
        std::vector<double> r(n), z(n), q(n), d(n), tmp(n);
        matvec(x, r);
        double bnorm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            r[i] = b[i] - r[i];
            bnorm2 += b[i] * b[i];
        }
        const double stop2 =
            std::max(bnorm2 > 0.0 ? tol * tol * bnorm2 : tol * tol, abs_tol * abs_tol);
        double rnorm2 = 0.0;
        for (int i = 0; i < n; ++i) rnorm2 += r[i] * r[i];
        if (rnorm2 <= stop2) return bnorm2 > 0.0 ? std::sqrt(rnorm2 / bnorm2) : 0.0;

        precondition(r, z, tmp);
        d = z;
        double rz = 0.0;
        for (int i = 0; i < n; ++i) rz += r[i] * z[i];
        for (int it = 0; it < max_iter; ++it) {
            matvec(d, q);
            double dq = 0.0;
            for (int i = 0; i < n; ++i) dq += d[i] * q[i];
            if (dq <= 0.0) break; // loss of positive definiteness at round-off
            const double alpha = rz / dq;
            rnorm2 = 0.0;
            for (int i = 0; i < n; ++i) {
                x[i] += alpha * d[i];
                r[i] -= alpha * q[i];
                rnorm2 += r[i] * r[i];
            }
            if (rnorm2 <= stop2) break;
            precondition(r, z, tmp);
            double rz_new = 0.0;
            for (int i = 0; i < n; ++i) rz_new += r[i] * z[i];
            const double betac = rz_new / rz;
            rz = rz_new;
            for (int i = 0; i < n; ++i) d[i] = z[i] + betac * d[i];
        }
        return bnorm2 > 0.0 ? std::sqrt(rnorm2 / bnorm2) : std::sqrt(rnorm2);
    }
};

} // namespace

ScalarField solve_p_capacitary(const RegionMask& mask, const PLaplaceConfig& cfg,
                               const ScalarField* warm_start, SolveInfo* info) {
    if (cfg.p <= 1.0) throw OutOfRange("solve_p_capacitary: p must exceed 1");
    const Grid2D& g = mask.grid;
    const double h = g.h;
    const double range = std::abs(mask.dirichlet_inner - mask.dirichlet_outer);
    const double tol = cfg.picard_tol > 0.0
                           ? cfg.picard_tol
                           : std::max(1e-8, 500.0 * cfg.linear_tol * std::max(range, 1.0) / (h * h));
    const int linear_max = cfg.linear_max > 0 ? cfg.linear_max : 40 * std::max(g.nx, g.ny) + 2000;

    ScalarField u(g, 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            switch (mask.at(i, j)) {
                case NodeLabel::Inner: u.at(i, j) = mask.dirichlet_inner; break;
                case NodeLabel::Outer: u.at(i, j) = mask.dirichlet_outer; break;
                case NodeLabel::Annulus:
                    u.at(i, j) = warm_start && warm_start->grid.size() == g.size()
                                     ? warm_start->values[g.idx(i, j)]
                                     : 0.5 * (mask.dirichlet_inner + mask.dirichlet_outer);
                    break;
            }
        }

    EdgeCoeffs co;
    const bool warm = warm_start && warm_start->grid.size() == g.size();
    if (!warm && cfg.p != 2.0) {
        // Seed the lagged iteration with the sigma = 1 (Laplace) solution;
        // a flat start would make the first coefficient field degenerate.
        compute_coefficients(u, mask, 2.0, 0.0, co);
        LinearSystem sys(mask, co, u);
        std::vector<double> x(sys.node_of.size());
        for (std::size_t k = 0; k < sys.node_of.size(); ++k) x[k] = u.values[sys.node_of[k]];
        sys.solve_cg(x, 1e-6, linear_max); // an initial guess only
        for (std::size_t k = 0; k < sys.node_of.size(); ++k) u.values[sys.node_of[k]] = x[k];
    }

    double damping = std::clamp(cfg.damping, 0.0, 1.0);
    if (damping == 0.0) damping = 1.0;
    double prev_res = std::numeric_limits<double>::infinity();
    double prev_res2 = std::numeric_limits<double>::infinity();
    int worse_in_a_row = 0;

    compute_coefficients(u, mask, cfg.p, cfg.eps_reg, co);
    for (int it = 1; it <= cfg.picard_max; ++it) {
        LinearSystem sys(mask, co, u);
        std::vector<double> x(sys.node_of.size());
        for (std::size_t k = 0; k < sys.node_of.size(); ++k) x[k] = u.values[sys.node_of[k]];
        // Inexact Picard: solve each linearized system only as tightly as the
        // current nonlinear residual warrants; the final passes reach the full
        // linear tolerance on their own.
        const double abs_floor = std::isfinite(prev_res) && cfg.p != 2.0
                                     ? 0.02 * prev_res * h * h
                                     : 0.0;
        sys.solve_cg(x, cfg.linear_tol, linear_max, abs_floor);
        for (std::size_t k = 0; k < sys.node_of.size(); ++k) {
            double& v = u.values[sys.node_of[k]];
            v += damping * (x[k] - v);
        }

        compute_coefficients(u, mask, cfg.p, cfg.eps_reg, co);
        const double res = residual_with(u, mask, co);
        if (res < tol) {
            if (info) *info = {it, res, tol};
            return u;
        }
        // Halve the step when the residual grows twice in a row, or when a
        // period-2 oscillation makes no progress across two iterations (the
        // lagged iteration is only unconditionally stable for p <= 2).
        bool reduce = false;
        if (res > prev_res) {
            if (++worse_in_a_row >= 2) reduce = true;
        } else {
            worse_in_a_row = 0;
        }
        if (it >= 3 && res >= 0.9 * prev_res2) reduce = true;
        if (reduce) {
            damping = std::max(0.05, 0.5 * damping);
            worse_in_a_row = 0;
            prev_res2 = std::numeric_limits<double>::infinity();
            prev_res = res;
        } else {
            prev_res2 = prev_res;
            prev_res = res;
        }
        if (it == cfg.picard_max)
            throw NonConvergence("solve_p_capacitary: Picard iteration cap reached", it, res);
    }
    throw NonConvergence("solve_p_capacitary: no iterations executed", 0, prev_res);
}

ScalarField gradient_magnitude(const ScalarField& field) {
    const Grid2D& g = field.grid;
    ScalarField out(g, std::numeric_limits<double>::quiet_NaN());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!std::isfinite(field.at(i, j))) continue;
            out.at(i, j) = std::hypot(dx_at(field, i, j), dy_at(field, i, j));
        }
    return out;
}

double nonlinear_residual(const ScalarField& field, const RegionMask& mask, double p,
                          double eps_reg) {
    EdgeCoeffs co;
    compute_coefficients(field, mask, p, eps_reg, co);
    return residual_with(field, mask, co);
}

} // namespace pbern
