#ifndef MWLSE_FIT_HPP
#define MWLSE_FIT_HPP

#include <armadillo>
#include <string>
#include <vector>

#include "mwlse/optimize.hpp"
#include "mwlse/types.hpp"
#include "mwlse/weights.hpp"

namespace mwlse {

struct StageSummary {
    std::string stage;
    bool converged = false;
    int iterations = 0;
    int reweights = 0;
    double objective = arma::datum::nan;
    double score_norm = arma::datum::nan;
};

struct FitResult {
    ModelSpec spec;
    Theta theta;
    arma::vec theta_flat;
    bool converged = false;
    int iterations = 0;
    double score_norm = arma::datum::nan;   // projected score at theta
    double objective = arma::datum::nan;
    arma::mat fitted_means;
    arma::mat covariance;     // sandwich G, filled by the inference pass
    arma::vec std_errors;
    double r_hat = arma::datum::nan;        // working correlation estimate
    std::vector<StageSummary> stage_log;
    std::vector<std::string> warnings;
};

// Box bounds of the parameter space: c >= 1e-8, A and B entries >= 0.
arma::vec parameter_lower_bounds(const ModelSpec& spec);

// Crude moment-matched starting point: c = sample mean / 2, A and B
// diagonals 0.1, off-diagonals 0.
Theta default_theta_init(const ModelSpec& spec, const arma::mat& Y);

// Weighted least squares fit with fixed weights; empty W means identity,
// i.e. the conditional least squares estimator.
FitResult fit_first_step(const ModelSpec& spec, const arma::mat& Y,
                         const arma::cube& W = {});

// Marginal quasi-maximum likelihood: Poisson for the count family,
// Bernoulli otherwise.
FitResult fit_qmle(const ModelSpec& spec, const arma::mat& Y);

// Two-stage weighted least squares. The first step fixes the working
// correlation (and any extra parameters); the second stage then solves the
// weighted least squares equations with the pseudo-variances evaluated at
// the current mean parameters, reweighting to a fixed point.
FitResult fit_two_stage(const ModelSpec& spec, const arma::mat& Y,
                        const WeightPlan& plan, const arma::cube& prior_W = {});

// Weight slices used by the final stage of a fit: pseudo-variances at the
// fitted means and the correlation frozen at fit.r_hat. For LSE-style fits
// (identity plan) this is the identity sequence.
arma::cube final_stage_weights(const ModelSpec& spec, const FitResult& fit,
                               const WeightPlan& plan, const arma::mat& Y);

}  // namespace mwlse

#endif
