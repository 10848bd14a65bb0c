#include "mwlse/objective.hpp"

#include <cmath>
#include <stdexcept>

#include "mwlse/model.hpp"

namespace mwlse {

namespace {

arma::vec effective_init(const arma::mat& Y, const arma::vec& mean_init) {
    return mean_init.is_empty() ? sample_mean_init(Y) : mean_init;
}

void require_weights(const arma::mat& Y, const arma::cube& W) {
    if (W.n_slices != Y.n_rows || W.n_rows != Y.n_cols || W.n_cols != Y.n_cols)
        throw std::invalid_argument("weight cube shape does not match the panel");
    arma::mat chol_out;
    for (arma::uword t = 0; t < W.n_slices; ++t) {
        if (arma::norm(W.slice(t) - W.slice(t).t(), "inf") > 1e-8 ||
            !arma::chol(chol_out, W.slice(t)))
            throw std::domain_error("weight matrix not symmetric positive definite");
    }
}

// Per-coordinate quasi-score factor (Y - mean)/nu with the family clamping;
// zero where the mean is clamped.
void qmle_terms(const ModelSpec& spec, double y, double mean, double& ll, double& dll) {
    if (spec.family == Family::count) {
        const double lo = 1e-10;
        const double mc = std::max(mean, lo);
        ll = y * std::log(mc) - mc;
        dll = mean > lo ? (y - mc) / mc : 0.0;
    } else {
        const double pc = std::clamp(mean, kMeanClampLo, kMeanClampHi);
        ll = y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc);
        dll = (mean > kMeanClampLo && mean < kMeanClampHi)
                  ? (y - pc) / (pc * (1.0 - pc))
                  : 0.0;
    }
}

}  // namespace

double wls_objective_grad(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                          const arma::cube& W, const arma::vec& mean_init,
                          arma::vec& grad) {
    const arma::vec init = effective_init(Y, mean_init);
    const double T = static_cast<double>(Y.n_rows);
    double obj = 0.0;
    arma::vec score(static_cast<arma::uword>(spec.param_count()), arma::fill::zeros);
    detail::scan_mean_jacobian(
        spec, theta, Y, init,
        [&](arma::uword t, const arma::vec& mean, const arma::mat& J) {
            const arma::vec e = Y.row(t).t() - mean;
            const arma::vec We = W.slice(t) * e;
            obj += arma::dot(e, We);
            if (t > 0) score += J.t() * We;
        });
    grad = (-2.0 / T) * score;
    return obj / T;
}

double wls_objective(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                     const arma::cube& W, const arma::vec& mean_init) {
    require_weights(Y, W);
    const arma::mat path = mean_recursion(spec, theta, Y, effective_init(Y, mean_init));
    const arma::mat e = Y - path;
    double obj = 0.0;
    for (arma::uword t = 0; t < Y.n_rows; ++t)
        obj += arma::as_scalar(e.row(t) * W.slice(t) * e.row(t).t());
    obj /= static_cast<double>(Y.n_rows);
    if (!std::isfinite(obj)) throw std::domain_error("wls_objective: non-finite value");
    return obj;
}

arma::vec wls_score(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                    const arma::cube& W, const arma::vec& mean_init) {
    require_weights(Y, W);
    arma::vec grad;
    wls_objective_grad(spec, theta, Y, W, mean_init, grad);
    if (!grad.is_finite()) throw std::domain_error("wls_score: non-finite value");
    return -0.5 * grad;
}

double qmle_neg_loglik_grad(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                            const arma::vec& mean_init, arma::vec& grad) {
    const arma::vec init = effective_init(Y, mean_init);
    const double T = static_cast<double>(Y.n_rows);
    double ll_sum = 0.0;
    arma::vec score(static_cast<arma::uword>(spec.param_count()), arma::fill::zeros);
    detail::scan_mean_jacobian(
        spec, theta, Y, init,
        [&](arma::uword t, const arma::vec& mean, const arma::mat& J) {
            arma::vec g(mean.n_elem);
            for (arma::uword i = 0; i < mean.n_elem; ++i) {
                double ll, dll;
                qmle_terms(spec, Y(t, i), mean(i), ll, dll);
                ll_sum += ll;
                g(i) = dll;
            }
            if (t > 0) score += J.t() * g;
        });
    grad = -score / T;
    return -ll_sum / T;
}

arma::mat wls_expected_hessian(const ModelSpec& spec, const Theta& theta,
                               const arma::mat& Y, const arma::cube& W,
                               const arma::vec& mean_init) {
    const arma::vec init = effective_init(Y, mean_init);
    const auto m = static_cast<arma::uword>(spec.param_count());
    arma::mat H(m, m, arma::fill::zeros);
    detail::scan_mean_jacobian(
        spec, theta, Y, init,
        [&](arma::uword t, const arma::vec&, const arma::mat& J) {
            if (t > 0) H += J.t() * W.slice(t) * J;
        });
    return (2.0 / static_cast<double>(Y.n_rows)) * H;
}

arma::mat qmle_expected_hessian(const ModelSpec& spec, const Theta& theta,
                                const arma::mat& Y, const arma::vec& mean_init) {
    const arma::vec init = effective_init(Y, mean_init);
    const auto m = static_cast<arma::uword>(spec.param_count());
    arma::mat H(m, m, arma::fill::zeros);
    detail::scan_mean_jacobian(
        spec, theta, Y, init,
        [&](arma::uword t, const arma::vec& mean, const arma::mat& J) {
            if (t == 0) return;
            arma::vec w(mean.n_elem);
            for (arma::uword i = 0; i < mean.n_elem; ++i) {
                if (spec.family == Family::count) {
                    w(i) = mean(i) > 1e-10 ? 1.0 / mean(i) : 0.0;
                } else {
                    const double pc = std::clamp(mean(i), kMeanClampLo, kMeanClampHi);
                    w(i) = (mean(i) > kMeanClampLo && mean(i) < kMeanClampHi)
                               ? 1.0 / (pc * (1.0 - pc))
                               : 0.0;
                }
            }
            H += J.t() * arma::diagmat(w) * J;
        });
    return H / static_cast<double>(Y.n_rows);
}

double qmle_neg_loglik(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                       const arma::vec& mean_init) {
    arma::vec grad;
    return qmle_neg_loglik_grad(spec, theta, Y, effective_init(Y, mean_init), grad);
}

arma::vec qmle_score(const ModelSpec& spec, const Theta& theta, const arma::mat& Y,
                     const arma::vec& mean_init) {
    arma::vec grad;
    qmle_neg_loglik_grad(spec, theta, Y, effective_init(Y, mean_init), grad);
    return -grad;
}

}  // namespace mwlse
