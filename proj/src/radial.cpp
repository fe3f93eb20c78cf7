#include "pbern/radial.hpp"

#include <cmath>
#include <functional>

namespace pbern {

namespace {

constexpr double kBranchTol = 1e-9; // |p - N| below this uses the log branch

bool log_branch(double p, int N) { return std::abs(p - N) < kBranchTol; }

double beta_of(double p, int N) { return (p - N) / (p - 1.0); }

double bisect(const std::function<double(double)>& f, double lo, double hi, double flo,
              double tol = 1e-12, int max_iter = 200) {
    // f(lo) and f(hi) must bracket a root; flo carries the sign at lo.
    for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm <= 0.0) == (flo <= 0.0)) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Level radius of the annulus [r, R] for the fraction theta in (0,1) measured
// toward the inner boundary: the radius where the normalized profile
// (1 at r, 0 at R) equals theta. Stable as beta -> 0 via expm1/log1p.
double level_radius_theta(double p, int N, double r, double R, double theta) {
    if (log_branch(p, N)) return std::pow(r, theta) * std::pow(R, 1.0 - theta);
    const double beta = beta_of(p, N);
    const double m = std::expm1(beta * std::log(r / R)); // (r/R)^beta - 1
    return R * std::exp(std::log1p(theta * m) / beta);
}

} // namespace

RadialProblem::RadialProblem(double p_, int N_, double r_, double R_, double l_, double v_in_,
                             double v_out_)
    : p(p_), N(N_), r(r_), R(R_), l(l_), v_in(v_in_), v_out(v_out_) {
    if (p <= 1.0) throw OutOfRange("RadialProblem: p must exceed 1");
    if (N < 2) throw OutOfRange("RadialProblem: N must be at least 2");
    if (!(0.0 < r && r < R)) throw OutOfRange("RadialProblem: need 0 < r < R");
    if (v_in == v_out) throw OutOfRange("RadialProblem: equal Dirichlet values");
    const double th = (l - v_out) / (v_in - v_out);
    if (!(0.0 < th && th < 1.0))
        throw OutOfRange("RadialProblem: level not strictly between boundary values");
}

double radial_potential(const RadialProblem& prob, double rho) {
    if (rho < prob.r || rho > prob.R) throw OutOfRange("radial_potential: rho outside [r, R]");
    double phi; // normalized profile: 1 at r, 0 at R
    if (log_branch(prob.p, prob.N)) {
        phi = std::log(prob.R / rho) / std::log(prob.R / prob.r);
    } else {
        const double beta = beta_of(prob.p, prob.N);
        phi = std::expm1(beta * std::log(rho / prob.R)) / std::expm1(beta * std::log(prob.r / prob.R));
    }
    return prob.v_out + (prob.v_in - prob.v_out) * phi;
}

double level_radius(const RadialProblem& prob) {
    const double theta = (prob.l - prob.v_out) / (prob.v_in - prob.v_out);
    return level_radius_theta(prob.p, prob.N, prob.r, prob.R, theta);
}

double interior_gap(const RadialProblem& prob, double r) {
    if (r < 0.0 || r > prob.R) throw OutOfRange("interior_gap: r outside [0, R]");
    if (r == prob.R) return 0.0;
    if (r == 0.0) {
        if (prob.p <= prob.N + kBranchTol) return 0.0;
        // Lambda(0) = l^((p-1)/(p-N)) R for p > N
        return std::pow(prob.l, (prob.p - 1.0) / (prob.p - prob.N)) * prob.R;
    }
    // Interior orientation: u = 0 on |x|=r, u = 1 on |x|=R, level set at the
    // fraction 1-l toward the inner boundary.
    return level_radius_theta(prob.p, prob.N, r, prob.R, 1.0 - prob.l) - r;
}

InteriorExtremum interior_extremum(const RadialProblem& prob) {
    const double R = prob.R, l = prob.l, p = prob.p;
    const double N = prob.N;
    InteriorExtremum out{};
    if (log_branch(p, prob.N)) {
        out.r_max = R * std::pow(1.0 - l, 1.0 / l);
        out.lambda_max = out.r_max / (1.0 / l - 1.0);
        out.lambda_min = 0.0;
        return out;
    }
    const double q = (p - 1.0) / (p - N); // = 1/beta
    out.r_max = R * std::pow(l / (std::pow(1.0 - l, (N - p) / (N - 1.0)) - (1.0 - l)), q);
    out.lambda_max =
        R * (std::pow(l / (1.0 - std::pow(1.0 - l, (p - 1.0) / (N - 1.0))), q) -
             std::pow(l / (std::pow(1.0 - l, (N - p) / (N - 1.0)) - (1.0 - l)), q));
    out.lambda_min = p > N ? std::pow(l, q) * R : 0.0;
    return out;
}

InteriorRadii solve_interior_radii(const RadialProblem& prob, double lambda) {
    if (lambda <= 0.0) throw OutOfRange("solve_interior_radii: lambda must be positive");
    const InteriorExtremum ext = interior_extremum(prob);
    if (lambda > ext.lambda_max) throw LambdaTooLarge("solve_interior_radii: lambda > lambda_max");

    InteriorRadii out{};
    if (lambda == ext.lambda_max) {
        out.r1 = ext.r_max;
        out.r2 = ext.r_max;
        return out;
    }
    const auto gap = [&](double r) { return interior_gap(prob, r) - lambda; };
    const double g_rmax = gap(ext.r_max);
    if (g_rmax <= 0.0) { // lambda == lambda_max up to rounding
        out.r1 = ext.r_max;
        out.r2 = ext.r_max;
        return out;
    }
    // Elliptic root on the decreasing branch [r_max, R].
    out.r2 = bisect(gap, ext.r_max, prob.R, g_rmax);
    // Hyperbolic root on the increasing branch [0, r_max]; absent when
    // Lambda(0) already exceeds lambda (p > N, lambda < lambda_min).
    const double g0 = gap(0.0);
    if (g0 < 0.0) out.r1 = bisect(gap, 0.0, ext.r_max, g0);
    return out;
}

double solve_exterior_radius(double p, int N, double r, double l, double lambda) {
    if (lambda <= 0.0) throw OutOfRange("solve_exterior_radius: lambda must be positive");
    if (r <= 0.0) throw OutOfRange("solve_exterior_radius: r must be positive");
    if (!(0.0 < l && l < 1.0)) throw OutOfRange("solve_exterior_radius: l outside (0,1)");
    // Exterior orientation (1 at r, 0 at R): the gap R - rho_l(R) grows
    // strictly from 0 to infinity, so a doubling bracket always closes.
    const auto gap = [&](double R) { return R - level_radius_theta(p, N, r, R, l) - lambda; };
    double hi = 2.0 * r;
    while (gap(hi) < 0.0) hi *= 2.0;
    return bisect(gap, r, hi, -lambda);
}

double bernoulli_limit(double p, int N, double R) {
    if (p <= 1.0 || N < 2 || R <= 0.0) throw OutOfRange("bernoulli_limit: invalid arguments");
    if (log_branch(p, N)) return std::exp(1.0) / R;
    return std::pow((p - 1.0) / (N - 1.0), (N - 1.0) / (p - N)) / R;
}

} // namespace pbern
