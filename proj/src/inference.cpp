#include "mwlse/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "mwlse/model.hpp"
#include "mwlse/rng.hpp"

namespace mwlse {

SandwichParts sandwich_covariance(const ModelSpec& spec, const Theta& theta,
                                  const arma::mat& Y, const arma::cube& W,
                                  const arma::vec& mean_init) {
    const arma::uword T = Y.n_rows;
    const auto m = static_cast<arma::uword>(spec.param_count());
    if (W.n_slices != T || W.n_rows != Y.n_cols)
        throw std::invalid_argument("sandwich_covariance: weight cube shape mismatch");

    const arma::vec init = mean_init.is_empty() ? sample_mean_init(Y) : mean_init;
    SandwichParts parts;
    parts.H.zeros(m, m);
    parts.I.zeros(m, m);
    detail::scan_mean_jacobian(
        spec, theta, Y, init,
        [&](arma::uword t, const arma::vec& mean, const arma::mat& J) {
            if (t == 0) return;
            const arma::mat WJ = W.slice(t) * J;
            parts.H += J.t() * WJ;
            const arma::vec s = WJ.t() * (Y.row(t).t() - mean);
            parts.I += s * s.t();
        });
    parts.H /= static_cast<double>(T);
    parts.I /= static_cast<double>(T);
    parts.H = arma::symmatu(parts.H);
    parts.I = arma::symmatu(parts.I);

    parts.h_rcond = arma::rcond(parts.H);
    arma::mat H_use = parts.H;
    if (!(parts.h_rcond > 1e-12)) {
        H_use.diag() += 1e-10 * arma::trace(parts.H) / static_cast<double>(m);
        parts.ridged = true;
    }
    arma::mat Hinv;
    if (!arma::inv_sympd(Hinv, H_use)) {
        if (!arma::inv(Hinv, H_use))
            throw std::runtime_error("sandwich_covariance: H is singular");
    }
    parts.G = arma::symmatu(Hinv * parts.I * Hinv);
    return parts;
}

arma::vec standard_errors(const SandwichParts& parts, arma::uword T) {
    return arma::sqrt(arma::clamp(parts.G.diag(), 0.0, arma::datum::inf) /
                      static_cast<double>(T));
}

std::vector<Significance> significance_flags(const arma::vec& theta_flat,
                                             const arma::vec& std_errors) {
    if (theta_flat.n_elem != std_errors.n_elem)
        throw std::invalid_argument("significance_flags: length mismatch");
    std::vector<Significance> out(theta_flat.n_elem);
    for (arma::uword h = 0; h < theta_flat.n_elem; ++h) {
        if (!(std_errors(h) > 0.0))
            throw std::domain_error("significance_flags: standard error must be positive");
        Significance s;
        s.z = theta_flat(h) / std_errors(h);
        s.p_value = 2.0 * normal_cdf(-std::abs(s.z));
        if (s.p_value < 1e-4) s.marker = "**";
        else if (s.p_value < 5e-4) s.marker = "*";
        else if (s.p_value < 1e-3) s.marker = "†";
        out[h] = s;
    }
    return out;
}

}  // namespace mwlse
