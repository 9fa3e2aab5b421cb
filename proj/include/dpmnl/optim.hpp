#ifndef DPMNL_OPTIM_HPP
#define DPMNL_OPTIM_HPP

#include <functional>
#include <vector>

#include "common.hpp"

namespace dpmnl {

struct OptimResult {
    std::vector<double> x;
    double value = neg_inf;
    double grad_inf_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Maximizes f via BFGS with backtracking line search. The callback fills the
// gradient and returns the objective. Dimensions here are small (a handful of
// taste coefficients), so a dense inverse-Hessian approximation is fine.
inline OptimResult bfgs_maximize(
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& f_grad,
    std::vector<double> x0, double grad_tol = 1e-6, std::size_t max_iter = 500) {
    const std::size_t d = x0.size();
    std::vector<double> g(d), g_new(d), p(d), s(d), y(d);
    std::vector<std::vector<double>> H(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) H[i][i] = 1.0;

    OptimResult res;
    res.x = x0;
    double fx = f_grad(res.x, g);
    res.value = fx;
    if (!std::isfinite(fx)) throw std::runtime_error("bfgs_maximize: non-finite objective at start");

    auto inf_norm = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double e : v) m = std::max(m, std::fabs(e));
        return m;
    };

    for (std::size_t it = 0; it < max_iter; ++it) {
        res.iterations = it;
        res.grad_inf_norm = inf_norm(g);
        if (res.grad_inf_norm <= grad_tol) {
            res.converged = true;
            return res;
        }
        // ascent direction p = H g
        for (std::size_t i = 0; i < d; ++i) {
            p[i] = 0.0;
            for (std::size_t j = 0; j < d; ++j) p[i] += H[i][j] * g[j];
        }
        double gp = 0.0;
        for (std::size_t i = 0; i < d; ++i) gp += g[i] * p[i];
        if (gp <= 0.0) {  // H lost positive definiteness, restart from steepest ascent
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) H[i][j] = (i == j) ? 1.0 : 0.0;
            p = g;
            gp = 0.0;
            for (std::size_t i = 0; i < d; ++i) gp += g[i] * g[i];
        }

        // backtracking Armijo search
        double step = 1.0;
        double f_new = neg_inf;
        std::vector<double> x_new(d);
        bool ok = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < d; ++i) x_new[i] = res.x[i] + step * p[i];
            f_new = f_grad(x_new, g_new);
            if (std::isfinite(f_new) && f_new >= fx + 1e-4 * step * gp) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) return res;  // line search failed, keep best iterate

        for (std::size_t i = 0; i < d; ++i) {
            s[i] = x_new[i] - res.x[i];
            y[i] = g[i] - g_new[i];  // change in -grad of the minimized negative == g_old - g_new
        }
        res.x = x_new;
        fx = f_new;
        res.value = fx;
        g = g_new;

        // BFGS update of H (inverse Hessian of -f); for maximization track
        // curvature along y = grad_old - grad_new
        double sy = 0.0;
        for (std::size_t i = 0; i < d; ++i) sy += s[i] * y[i];
        double ss = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            ss += s[i] * s[i];
            yy += y[i] * y[i];
        }
        if (sy > 1e-12 * std::sqrt(ss * yy)) {
            std::vector<double> Hy(d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) Hy[i] += H[i][j] * y[j];
            double yHy = 0.0;
            for (std::size_t i = 0; i < d; ++i) yHy += y[i] * Hy[i];
            double rho = 1.0 / sy;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    H[i][j] += (1.0 + rho * yHy) * rho * s[i] * s[j]
                               - rho * (Hy[i] * s[j] + s[i] * Hy[j]);
        }
    }
    res.iterations = max_iter;
    res.grad_inf_norm = inf_norm(g);
    res.converged = res.grad_inf_norm <= grad_tol;
    return res;
}

// 1-D maximizer: coarse scan over [lo, hi] then derivative bisection inside
// the bracketing neighbours. Used for the concentration-parameter update.
inline double scan_bisect_maximize(const std::function<double(double)>& f,
                                   const std::function<double(double)>& dfdx,
                                   double lo, double hi, std::size_t n_scan = 400,
                                   double dtol = 1e-8) {
    double best_x = lo, best_f = neg_inf;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i <= n_scan; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_scan);
        double fx = f(x);
        if (fx > best_f) {
            best_f = fx;
            best_x = x;
            best_i = i;
        }
    }
    double a = (best_i == 0) ? lo : lo + (hi - lo) * static_cast<double>(best_i - 1) / n_scan;
    double b = (best_i == n_scan) ? hi : lo + (hi - lo) * static_cast<double>(best_i + 1) / n_scan;
    double da = dfdx(a), db = dfdx(b);
    if (da <= 0.0 || db >= 0.0) return best_x;  // maximum at scan boundary
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        double dm = dfdx(m);
        if (std::fabs(dm) <= dtol) return m;
        if (dm > 0.0)
            a = m;
        else
            b = m;
    }
    return 0.5 * (a + b);
}

}  // namespace dpmnl

#endif
