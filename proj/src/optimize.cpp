#include "mwlse/optimize.hpp"

#include <cmath>
#include <stdexcept>

namespace mwlse {

namespace {

arma::vec project(const arma::vec& x, const arma::vec& lower) {
    return arma::max(x, lower);
}

bool finite(double f, const arma::vec& g) { return std::isfinite(f) && g.is_finite(); }

struct LineSearchResult {
    bool accepted = false;
    arma::vec x;
    arma::vec g;
    double f = arma::datum::nan;
};

// backtracking Armijo search along the projected path x(alpha) = P(x + alpha p)
LineSearchResult line_search(const ObjectiveGradFn& fg, const arma::vec& lower,
                             const arma::vec& x, const arma::vec& g, double f,
                             const arma::vec& p) {
    constexpr double c1 = 1e-4;
    LineSearchResult res;
    double alpha = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
        arma::vec x_new = project(x + alpha * p, lower);
        const arma::vec step = x_new - x;
        if (arma::norm(step, "inf") == 0.0) return res;
        arma::vec g_new(x.n_elem);
        const double f_new = fg(x_new, g_new);
        if (finite(f_new, g_new) && f_new <= f + c1 * arma::dot(g, step)) {
            res.accepted = true;
            res.x = std::move(x_new);
            res.g = std::move(g_new);
            res.f = f_new;
            return res;
        }
        alpha *= 0.5;
    }
    return res;
}

}  // namespace

arma::vec projected_gradient(const arma::vec& grad, const arma::vec& x,
                             const arma::vec& lower) {
    arma::vec pg = grad;
    for (arma::uword i = 0; i < x.n_elem; ++i) {
        if (x(i) - lower(i) <= 1e-12 && grad(i) > 0.0) pg(i) = 0.0;
    }
    return pg;
}

OptimResult optimize(const ObjectiveGradFn& fg, const arma::vec& lower,
                     const arma::vec& x0, const OptimOptions& opts) {
    const arma::uword m = x0.n_elem;
    if (lower.n_elem != m) throw std::invalid_argument("optimize: bound length mismatch");

    OptimResult res;
    arma::vec x = project(x0, lower);
    arma::vec g(m);
    double f = fg(x, g);
    if (!finite(f, g)) {
        res.x = x;
        res.objective = f;
        return res;   // infeasible start
    }

    arma::vec x_best = x;
    double f_best = f;
    const bool scoring = static_cast<bool>(opts.hessian);

    arma::mat Hinv;
    bool hinv_scaled = false;
    if (!scoring) Hinv = arma::eye(m, m);
    double damping = 1e-8;

    int iter = 0;
    double pg_norm = arma::norm(projected_gradient(g, x, lower), 2);
    while (iter < opts.max_iter && pg_norm > opts.grad_tol) {
        ++iter;

        // blocked coordinates: at the bound with the step pointing outward
        arma::uvec free_idx(m);
        arma::uword n_free = 0;
        for (arma::uword i = 0; i < m; ++i) {
            if (!(x(i) - lower(i) <= 1e-12 && g(i) > 0.0)) free_idx(n_free++) = i;
        }
        free_idx.resize(n_free);
        if (n_free == 0) break;

        LineSearchResult ls;
        if (scoring) {
            // damped scoring step on the expected Hessian, restricted to the
            // free coordinates
            const arma::mat H = opts.hessian(x);
            const arma::mat H_ff = H(free_idx, free_idx);
            const arma::vec g_f = g(free_idx);
            const double scale =
                arma::trace(H_ff) / static_cast<double>(n_free) + 1e-30;
            for (int attempt = 0; attempt < 12 && !ls.accepted; ++attempt) {
                arma::mat H_damped = H_ff;
                H_damped.diag() += damping * scale;
                arma::vec p_f;
                const bool solved = arma::solve(p_f, H_damped, -g_f,
                                                arma::solve_opts::likely_sympd);
                if (solved && arma::dot(p_f, g_f) < 0.0) {
                    arma::vec p(m, arma::fill::zeros);
                    p(free_idx) = p_f;
                    ls = line_search(fg, lower, x, g, f, p);
                }
                if (!ls.accepted) damping = std::max(damping * 100.0, 1e-6);
            }
            if (ls.accepted) damping = std::max(damping / 10.0, 1e-10);
        } else {
            const arma::vec pg = projected_gradient(g, x, lower);
            arma::vec p = -(Hinv * pg);
            for (arma::uword i = 0; i < m; ++i)
                if (x(i) - lower(i) <= 1e-12 && g(i) > 0.0) p(i) = 0.0;
            if (arma::dot(p, pg) > -1e-14 * arma::norm(p, 2) * arma::norm(pg, 2)) {
                Hinv.eye();
                hinv_scaled = true;
                p = -pg;
            }
            ls = line_search(fg, lower, x, g, f, p);
            if (!ls.accepted && arma::norm(p + pg, "inf") > 0.0) {
                Hinv.eye();
                hinv_scaled = true;
                ls = line_search(fg, lower, x, g, f, -pg);
            }
        }
        if (!ls.accepted) break;

        const arma::vec s = ls.x - x;
        const arma::vec y = ls.g - g;
        const double obj_drop = f - ls.f;
        x = ls.x;
        f = ls.f;
        g = ls.g;
        if (f < f_best) {
            f_best = f;
            x_best = x;
        }
        pg_norm = arma::norm(projected_gradient(g, x, lower), 2);

        if (!scoring) {
            const double sy = arma::dot(s, y);
            if (sy > 1e-12 * arma::norm(s, 2) * arma::norm(y, 2)) {
                if (!hinv_scaled) {
                    Hinv = (sy / arma::dot(y, y)) * arma::eye(m, m);
                    hinv_scaled = true;
                }
                const arma::vec Hy = Hinv * y;
                const double yHy = arma::dot(y, Hy);
                Hinv += ((sy + yHy) / (sy * sy)) * (s * s.t()) -
                        (Hy * s.t() + s * Hy.t()) / sy;
            }
        }

        // genuine stagnation: essentially no progress in value or position
        if (obj_drop >= 0.0 && obj_drop <= opts.obj_tol &&
            arma::norm(s, "inf") <= 1e-10)
            break;
    }

    res.x = x_best;
    res.objective = f_best;
    res.iterations = iter;
    arma::vec g_best(m);
    fg(x_best, g_best);
    res.grad_norm = arma::norm(projected_gradient(g_best, x_best, lower), 2);
    res.converged = res.grad_norm <= 1e-6;
    return res;
}

}  // namespace mwlse
