#ifndef MWLSE_OBJECTIVE_HPP
#define MWLSE_OBJECTIVE_HPP

#include <armadillo>

#include "mwlse/types.hpp"

namespace mwlse {

// Weighted least squares criterion T^{-1} sum_t e_t' W_t e_t with
// e_t = Y_t - mean_t(theta). W holds one d x d slice per t. An empty
// mean_init selects the per-coordinate sample mean of Y.
double wls_objective(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                     const arma::cube& W, const arma::vec& mean_init = {});

// Score T^{-1} sum_t J_t' W_t e_t; equals -1/2 of the objective gradient.
arma::vec wls_score(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                    const arma::cube& W, const arma::vec& mean_init = {});

// Marginal quasi-log-likelihood (sign-flipped, per-time average):
// Poisson  sum_i (Y log mean - mean) for the count family,
// Bernoulli sum_i (Y log p + (1-Y) log(1-p)) otherwise, means clamped.
double qmle_neg_loglik(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                       const arma::vec& mean_init = {});

// Quasi-score T^{-1} sum_t J_t' D_t(theta)^{-1} e_t.
arma::vec qmle_score(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                     const arma::vec& mean_init = {});

// Objective value and gradient in one pass; used by the fitting drivers.
double wls_objective_grad(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                          const arma::cube& W, const arma::vec& mean_init,
                          arma::vec& grad);
double qmle_neg_loglik_grad(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                            const arma::vec& mean_init, arma::vec& grad);

// Expected Hessians of the two objectives, used for scoring steps:
// (2/T) sum J' W J for the quadratic criterion, (1/T) sum J' D^{-1} J for
// the quasi-likelihood.
arma::mat wls_expected_hessian(const ModelSpec& spec, const Theta& theta,
                               const arma::mat& Y, const arma::cube& W,
                               const arma::vec& mean_init = {});
arma::mat qmle_expected_hessian(const ModelSpec& spec, const Theta& theta,
                                const arma::mat& Y, const arma::vec& mean_init = {});

}  // namespace mwlse

#endif
