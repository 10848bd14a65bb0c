#include "mwlse/weights.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mwlse/model.hpp"

namespace mwlse {

namespace {

void require_eqc_range(double r, int d) {
    const double lo = -1.0 / (d - 1);
    if (!(r > lo && r < 1.0)) {
        std::ostringstream os;
        os << "equicorrelation parameter " << r << " outside (" << lo << ", 1) for d=" << d;
        throw std::domain_error(os.str());
    }
}

}  // namespace

arma::mat eqc_matrix(double r, int d) {
    return (1.0 - r) * arma::eye(d, d) + r * arma::ones(d, d);
}

arma::mat eqc_inverse(double r, int d) {
    if (d < 2) throw std::invalid_argument("eqc_inverse: d must be >= 2");
    require_eqc_range(r, d);
    const double denom = (1.0 - r) * (1.0 + (d - 1) * r);
    const double a = (1.0 + (d - 2) * r) / denom;
    const double b = -r / denom;
    return (a - b) * arma::eye(d, d) + b * arma::ones(d, d);
}

arma::mat pearson_residual_correlations(const arma::mat& Y, const arma::mat& fitted) {
    if (Y.n_rows != fitted.n_rows || Y.n_cols != fitted.n_cols)
        throw std::invalid_argument("pearson_residual_correlations: shape mismatch");
    const arma::mat e = Y - fitted;
    const arma::vec norms = arma::sqrt(arma::sum(arma::square(e), 0)).t();
    if (norms.min() <= 0.0)
        throw std::domain_error("pearson_residual_correlations: zero residual variance");
    arma::mat R = e.t() * e;
    R /= norms * norms.t();
    R.diag().ones();
    return R;
}

double estimate_r(const WeightPlan& plan, const arma::mat& Rhat) {
    const int d = static_cast<int>(Rhat.n_rows);
    if (d < 2) throw std::invalid_argument("estimate_r: need d >= 2");
    double r;
    if (plan.r_estimator == REstimator::fixed) {
        r = plan.fixed_r;
    } else {
        double best = -arma::datum::inf;
        double sum = 0.0;
        int n = 0;
        // lexicographic scan; first pair attaining the max wins on ties
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                const double v = Rhat(i, j);
                if (v > best) best = v;
                sum += v;
                ++n;
            }
        }
        r = plan.r_estimator == REstimator::max_pairwise ? best : sum / n;
    }
    const double lo = -1.0 / (d - 1) + 1e-6;
    const double hi = 1.0 - 1e-6;
    return std::clamp(r, lo, hi);
}

arma::mat pseudo_variances(const ModelSpec& spec, const arma::mat& fitted,
                           const WeightPlan& plan) {
    arma::mat nu(fitted.n_rows, fitted.n_cols);
    switch (plan.variance_fn) {
        case VarianceFn::identity_mean:
            nu = arma::clamp(fitted, 1e-10, arma::datum::inf);
            break;
        case VarianceFn::bernoulli: {
            const arma::mat p = arma::clamp(fitted, kMeanClampLo, kMeanClampHi);
            nu = p % (1.0 - p);
            break;
        }
        case VarianceFn::custom: {
            if (!plan.custom_nu)
                throw std::invalid_argument("pseudo_variances: custom variance not set");
            for (arma::uword t = 0; t < fitted.n_rows; ++t)
                nu.row(t) = plan.custom_nu(t, fitted.row(t), plan.gamma);
            break;
        }
    }
    (void)spec;
    if (!nu.is_finite() || nu.min() <= 0.0)
        throw std::domain_error("pseudo_variances: non-positive pseudo-variance");
    return nu;
}

arma::cube weights_from_parts(const arma::mat& nu, const arma::mat& p_inverse) {
    const arma::uword T = nu.n_rows;
    const arma::uword d = nu.n_cols;
    arma::cube W(d, d, T);
    for (arma::uword t = 0; t < T; ++t) {
        const arma::vec dinv_sqrt = 1.0 / arma::sqrt(nu.row(t).t());
        W.slice(t) = (dinv_sqrt * dinv_sqrt.t()) % p_inverse;
    }
    return W;
}

arma::cube build_weights(const ModelSpec& spec, const Theta& theta,
                         const WeightPlan& plan, const arma::mat& Y) {
    const arma::mat fitted = mean_recursion(spec, theta, Y, sample_mean_init(Y));
    arma::mat p_inv;
    if (plan.correlation == WorkingCorrelation::identity) {
        p_inv = arma::eye(spec.effective_dim(), spec.effective_dim());
    } else {
        const arma::mat Rhat = pearson_residual_correlations(Y, fitted);
        const double r = estimate_r(plan, Rhat);
        p_inv = eqc_inverse(r, spec.effective_dim());
    }
    return weights_from_parts(pseudo_variances(spec, fitted, plan), p_inv);
}

arma::cube identity_weights(int d, arma::uword T) {
    arma::cube W(d, d, T);
    W.each_slice() = arma::eye(d, d);
    return W;
}

}  // namespace mwlse
