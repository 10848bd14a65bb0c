#ifndef MWLSE_OPTIMIZE_HPP
#define MWLSE_OPTIMIZE_HPP

#include <armadillo>
#include <functional>

namespace mwlse {

// Objective with gradient; a non-finite value marks the point infeasible.
using ObjectiveGradFn = std::function<double(const arma::vec& x, arma::vec& grad)>;

// Expected-Hessian callback for scoring steps.
using HessianFn = std::function<arma::mat(const arma::vec& x)>;

struct OptimOptions {
    int max_iter = 500;
    double grad_tol = 1e-8;   // on the projected gradient norm
    double obj_tol = 1e-12;   // on the objective decrease
    HessianFn hessian;        // when set, damped scoring replaces BFGS
};

struct OptimResult {
    arma::vec x;
    double objective = arma::datum::nan;
    double grad_norm = arma::datum::nan;   // projected gradient at x
    int iterations = 0;
    bool converged = false;
};

// Projected quasi-Newton (BFGS with backtracking line search) over lower
// box bounds. x0 must be feasible; returns the best iterate seen.
OptimResult optimize(const ObjectiveGradFn& fg, const arma::vec& lower,
                     const arma::vec& x0, const OptimOptions& opts = {});

// Gradient with descent directions at active lower bounds zeroed out.
arma::vec projected_gradient(const arma::vec& grad, const arma::vec& x,
                             const arma::vec& lower);

}  // namespace mwlse

#endif
