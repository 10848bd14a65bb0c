#include "mwlse/dgp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mwlse/model.hpp"

namespace mwlse {

namespace {

void require_rho(double rho) {
    if (!(rho >= 0.0 && rho < 1.0))
        throw std::domain_error("copula rho must lie in [0, 1)");
}

void require_constraints(const ModelSpec& spec, const Theta& theta) {
    const ConstraintReport rep = check_constraints(spec, theta);
    if (!rep.ok) {
        std::ostringstream os;
        os << "simulation parameters violate constraints:";
        for (const auto& v : rep.violations) os << " " << v.what << ";";
        throw std::invalid_argument(os.str());
    }
}

void require_sim_config(const SimConfig& cfg) {
    if (cfg.T < 2) throw std::invalid_argument("SimConfig: T must be >= 2");
    if (cfg.burn_in < 0) throw std::invalid_argument("SimConfig: burn_in must be >= 0");
    if (cfg.max_events < 1) throw std::invalid_argument("SimConfig: max_events must be >= 1");
}

}  // namespace

arma::vec gaussian_copula_uniforms(int d, double rho, Rng& rng) {
    require_rho(rho);
    const double z0 = rng.normal();
    const double sr = std::sqrt(rho);
    const double sc = std::sqrt(1.0 - rho);
    arma::vec u(static_cast<arma::uword>(d));
    for (int i = 0; i < d; ++i) {
        u(i) = normal_cdf(sr * z0 + sc * rng.normal());
    }
    return u;
}

arma::vec count_from_intensities(const arma::vec& lambda, const CopulaSpec& copula,
                                 Rng& rng, long max_events) {
    if (lambda.min() <= 0.0)
        throw std::domain_error("count_from_intensities: intensities must be positive");
    const int d = static_cast<int>(lambda.n_elem);
    arma::vec counts(lambda.n_elem, arma::fill::zeros);
    arma::vec cum(lambda.n_elem, arma::fill::zeros);
    bool any_active = true;
    while (any_active) {
        const arma::vec u = gaussian_copula_uniforms(d, copula.rho, rng);
        any_active = false;
        for (int i = 0; i < d; ++i) {
            if (cum(i) > lambda(i)) continue;
            // clamp away from 1 so waiting times stay strictly positive
            cum(i) += -std::log(std::min(u(i), 1.0 - 1e-16));
            if (cum(i) <= lambda(i)) {
                counts(i) += 1.0;
                if (counts(i) > static_cast<double>(max_events)) {
                    std::ostringstream os;
                    os << "count_from_intensities: more than " << max_events
                       << " events in one cell (intensity " << lambda(i) << ")";
                    throw std::runtime_error(os.str());
                }
                any_active = true;
            }
        }
    }
    return counts;
}

arma::mat simulate_counts(const ModelSpec& spec, const Theta& theta,
                          const CopulaSpec& copula, const SimConfig& cfg) {
    require_sim_config(cfg);
    require_rho(copula.rho);
    require_constraints(spec, theta);

    Rng rng(cfg.seed);
    arma::vec lambda = stationary_mean(theta);
    const int total = cfg.T + cfg.burn_in;
    arma::mat Y(static_cast<arma::uword>(cfg.T), lambda.n_elem);
    for (int t = 0; t < total; ++t) {
        const arma::vec y = count_from_intensities(lambda, copula, rng, cfg.max_events);
        if (t >= cfg.burn_in) Y.row(static_cast<arma::uword>(t - cfg.burn_in)) = y.t();
        lambda = theta.c + theta.A * lambda + theta.B * y;
        if (!lambda.is_finite())
            throw std::runtime_error("simulate_counts: intensity became non-finite");
    }
    return Y;
}

arma::mat simulate_binary(const ModelSpec& spec, const Theta& theta,
                          const CopulaSpec& copula, const SimConfig& cfg) {
    require_sim_config(cfg);
    require_rho(copula.rho);
    require_constraints(spec, theta);

    Rng rng(cfg.seed);
    const int de = spec.effective_dim();
    arma::vec p = stationary_mean(theta);
    const int total = cfg.T + cfg.burn_in;
    arma::mat Y(static_cast<arma::uword>(cfg.T), static_cast<arma::uword>(de));
    for (int t = 0; t < total; ++t) {
        const arma::vec u = gaussian_copula_uniforms(de, copula.rho, rng);
        arma::vec y(static_cast<arma::uword>(de));
        for (int i = 0; i < de; ++i) y(i) = u(i) <= p(i) ? 1.0 : 0.0;
        if (t >= cfg.burn_in) Y.row(static_cast<arma::uword>(t - cfg.burn_in)) = y.t();
        p = theta.c + theta.A * p + theta.B * y;
    }
    return Y;
}

}  // namespace mwlse
