#ifndef MWLSE_DGP_HPP
#define MWLSE_DGP_HPP

#include <armadillo>
#include <cstdint>

#include "mwlse/rng.hpp"
#include "mwlse/types.hpp"

namespace mwlse {

// Gaussian exchangeable copula: one latent common factor, pairwise normal
// correlation rho on [0, 1).
struct CopulaSpec {
    double rho = 0.0;
};

struct SimConfig {
    int T = 0;
    int burn_in = 500;
    std::uint64_t seed = 0;
    long max_events = 1000000;   // per-cell arrival cap; exceeding it throws
};

// One joint draw U in (0,1)^d with U_i = Phi(sqrt(rho) Z0 + sqrt(1-rho) eps_i).
// Consumes exactly d + 1 normals from rng (Z0 first, then eps_1..eps_d).
arma::vec gaussian_copula_uniforms(int d, double rho, Rng& rng);

// Counts of unit-rate arrivals in [0, lambda_i] with exponential waiting times
// -log(U) coupled across coordinates through the copula, one joint uniform
// vector per arrival index. Marginally Poisson(lambda_i).
arma::vec count_from_intensities(const arma::vec& lambda, const CopulaSpec& copula,
                                 Rng& rng, long max_events);

// Count panel from the INGARCH recursion started at the stationary mean.
arma::mat simulate_counts(const ModelSpec& spec, const Theta& theta,
                          const CopulaSpec& copula, const SimConfig& cfg);

// Binary panel: Y_{i,t} = 1{ U_{i,t} <= p_{i,t} } with one joint copula
// vector per time step; marginally Bernoulli(p_{i,t}).
arma::mat simulate_binary(const ModelSpec& spec, const Theta& theta,
                          const CopulaSpec& copula, const SimConfig& cfg);

}  // namespace mwlse

#endif
