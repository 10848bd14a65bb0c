#ifndef MWLSE_WEIGHTS_HPP
#define MWLSE_WEIGHTS_HPP

#include <armadillo>
#include <functional>

#include "mwlse/types.hpp"

namespace mwlse {

enum class VarianceFn { identity_mean, bernoulli, custom };
enum class WorkingCorrelation { identity, eqc };
enum class REstimator { max_pairwise, mean_pairwise, fixed };

// nu_t(tau) hook: maps (t, fitted mean row, gamma) to a row of pseudo-variances.
using CustomVarianceFn =
    std::function<arma::rowvec(arma::uword t, const arma::rowvec& mean_row,
                               const arma::vec& gamma)>;

struct WeightPlan {
    VarianceFn variance_fn = VarianceFn::identity_mean;
    WorkingCorrelation correlation = WorkingCorrelation::identity;
    REstimator r_estimator = REstimator::max_pairwise;
    double fixed_r = 0.0;          // used when r_estimator == fixed
    arma::vec gamma;               // externally supplied extra parameters
    CustomVarianceFn custom_nu;    // required when variance_fn == custom
};

// Equicorrelation matrix (1-r) I + r J and its closed-form inverse
// (a-b) I + b J, a = [1+(d-2)r] / {(1-r)[1+(d-1)r]}, b = -r / {(1-r)[1+(d-1)r]}.
// Valid (positive definite) for r in (-1/(d-1), 1).
arma::mat eqc_matrix(double r, int d);
arma::mat eqc_inverse(double r, int d);

// Pearson correlations of the raw residuals Y - fitted, unit diagonal.
arma::mat pearson_residual_correlations(const arma::mat& Y, const arma::mat& fitted);

// Scalar correlation parameter from the strict upper triangle of Rhat,
// clamped into the positive-definite range of the EQC structure.
double estimate_r(const WeightPlan& plan, const arma::mat& Rhat);

// Pseudo-variance rows nu_t(tau) at the given fitted means.
arma::mat pseudo_variances(const ModelSpec& spec, const arma::mat& fitted,
                           const WeightPlan& plan);

// W_t = D_t^{-1/2} P^{-1} D_t^{-1/2}, one d x d slice per t.
arma::cube weights_from_parts(const arma::mat& nu, const arma::mat& p_inverse);

// Full weight construction at theta: fitted means from the recursion
// (sample-mean initialization), r from the plan, then the slices above.
arma::cube build_weights(const ModelSpec& spec, const Theta& theta,
                         const WeightPlan& plan, const arma::mat& Y);

// Identity weights, one slice per row of Y.
arma::cube identity_weights(int d, arma::uword T);

}  // namespace mwlse

#endif
