#ifndef MWLSE_INFERENCE_HPP
#define MWLSE_INFERENCE_HPP

#include <armadillo>
#include <string>
#include <vector>

#include "mwlse/types.hpp"

namespace mwlse {

// Sandwich pieces at theta: H = T^{-1} sum J' W J (bread),
// I = T^{-1} sum s s' with s = J' W e (meat), G = H^{-1} I H^{-1}.
struct SandwichParts {
    arma::mat H;
    arma::mat I;
    arma::mat G;
    double h_rcond = arma::datum::nan;
    bool ridged = false;   // ridge added to a near-singular H
};

SandwichParts sandwich_covariance(const ModelSpec& spec, const Theta& theta,
                                  const arma::mat& Y, const arma::cube& W,
                                  const arma::vec& mean_init = {});

// Per-parameter standard errors sqrt(G_hh / T).
arma::vec standard_errors(const SandwichParts& parts, arma::uword T);

struct Significance {
    double z = 0.0;
    double p_value = 1.0;
    std::string marker;   // "**" at 0.01%, "*" at 0.05%, dagger at 0.1%
};

// Two-sided normal z-tests against zero with three-tier markers.
std::vector<Significance> significance_flags(const arma::vec& theta_flat,
                                             const arma::vec& std_errors);

}  // namespace mwlse

#endif
