#include "mwlse/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mwlse/dgp.hpp"
#include "mwlse/model.hpp"
#include "mwlse/parallel.hpp"
#include "mwlse/rng.hpp"

namespace mwlse {

RelativeMse relative_mse(const arma::mat& estimates_a, const arma::mat& estimates_b,
                         const arma::vec& theta0) {
    if (estimates_a.n_rows != estimates_b.n_rows ||
        estimates_a.n_cols != estimates_b.n_cols ||
        estimates_a.n_cols != theta0.n_elem)
        throw std::invalid_argument("relative_mse: shape mismatch");
    if (estimates_a.n_rows < 1) throw std::invalid_argument("relative_mse: need S >= 1");

    const arma::mat da = estimates_a.each_row() - theta0.t();
    const arma::mat db = estimates_b.each_row() - theta0.t();
    const double num = arma::accu(arma::square(da));
    const double den = arma::accu(arma::square(db));
    if (den <= 0.0) throw std::domain_error("relative_mse: zero denominator");

    RelativeMse out;
    out.overall = num / den;
    const arma::rowvec num_h = arma::sum(arma::square(da), 0);
    const arma::rowvec den_h = arma::sum(arma::square(db), 0);
    out.per_param.set_size(theta0.n_elem);
    for (arma::uword h = 0; h < theta0.n_elem; ++h) {
        if (den_h(h) <= 0.0) throw std::domain_error("relative_mse: zero denominator");
        out.per_param(h) = num_h(h) / den_h(h);
    }
    return out;
}

arma::mat pearson_residuals(const arma::mat& Y, const arma::mat& fitted,
                            const arma::mat& nu, ResidualMode mode) {
    if (Y.n_rows != fitted.n_rows || Y.n_cols != fitted.n_cols ||
        nu.n_rows != Y.n_rows || nu.n_cols != Y.n_cols)
        throw std::invalid_argument("pearson_residuals: shape mismatch");
    if (!(nu.min() > 0.0))
        throw std::domain_error("pearson_residuals: zero variance cell");
    const arma::mat denom = mode == ResidualMode::conventional ? arma::sqrt(nu) : nu;
    return (Y - fitted) / denom;
}

AcfResult acf(const arma::vec& series, int max_lag) {
    const arma::uword T = series.n_elem;
    if (max_lag < 1 || static_cast<arma::uword>(max_lag) >= T)
        throw std::invalid_argument("acf: max_lag must lie in [1, T)");
    const double mean = arma::mean(series);
    const arma::vec cent = series - mean;
    const double denom = arma::dot(cent, cent);
    if (denom <= 0.0) throw std::domain_error("acf: constant series");

    AcfResult out;
    out.values.set_size(max_lag);
    for (int k = 1; k <= max_lag; ++k) {
        double acc = 0.0;
        for (arma::uword t = static_cast<arma::uword>(k); t < T; ++t)
            acc += cent(t) * cent(t - static_cast<arma::uword>(k));
        out.values(k - 1) = acc / denom;
    }
    out.band = 1.96 / std::sqrt(static_cast<double>(T));
    return out;
}

MaeResult mae(const arma::mat& Y, const arma::mat& fitted) {
    if (Y.n_rows != fitted.n_rows || Y.n_cols != fitted.n_cols)
        throw std::invalid_argument("mae: shape mismatch");
    MaeResult out;
    out.per_series = arma::mean(arma::abs(Y - fitted), 0).t();
    out.overall = arma::accu(arma::abs(Y - fitted)) / static_cast<double>(Y.n_elem);
    return out;
}

namespace {

struct RepOutcome {
    bool ok = false;
    arma::vec err_q;   // squared errors per parameter, qmle
    arma::vec err_w;   // squared errors per parameter, two-stage
};

}  // namespace

McReport monte_carlo(const std::vector<McGridPoint>& grid, const McOptions& opts) {
    if (opts.S < 1) throw std::invalid_argument("monte_carlo: need S >= 1");
    McReport report;
    report.master_seed = opts.master_seed;
    report.S = opts.S;

    for (std::size_t g = 0; g < grid.size(); ++g) {
        const McGridPoint& point = grid[g];
        const auto theta_it = opts.theta0.find(point.d);
        if (theta_it == opts.theta0.end()) {
            std::ostringstream os;
            os << "monte_carlo: no theta0 for d=" << point.d;
            throw std::invalid_argument(os.str());
        }
        const Theta& theta0 = theta_it->second;
        ModelSpec spec{Family::count, point.d, 2, opts.diagonal_a};
        const arma::vec theta0_flat = pack_params(theta0, spec);
        report.theta0_flat.emplace(point.d, theta0_flat);

        const auto t_start = std::chrono::steady_clock::now();
        std::vector<RepOutcome> slots(static_cast<std::size_t>(opts.S));
        parallel_for(static_cast<std::size_t>(opts.S), opts.threads, [&](std::size_t s) {
            RepOutcome& slot = slots[s];
            try {
                SimConfig cfg;
                cfg.T = point.T;
                cfg.burn_in = opts.burn_in;
                cfg.max_events = opts.max_events;
                cfg.seed = derive_seed(opts.master_seed, g, s);
                const arma::mat Y =
                    simulate_counts(spec, theta0, CopulaSpec{point.rho}, cfg);
                const FitResult fq = fit_qmle(spec, Y);
                const FitResult fw = fit_two_stage(spec, Y, opts.plan);
                if (!fq.converged || !fw.converged) return;
                slot.err_q = arma::square(fq.theta_flat - theta0_flat);
                slot.err_w = arma::square(fw.theta_flat - theta0_flat);
                slot.ok = true;
            } catch (const std::exception&) {
                slot.ok = false;   // counted as dropped
            }
        });

        // fixed-order aggregation, independent of the pool size
        McRow row;
        row.point = point;
        row.S = opts.S;
        arma::vec num(theta0_flat.n_elem, arma::fill::zeros);
        arma::vec den(theta0_flat.n_elem, arma::fill::zeros);
        for (const RepOutcome& slot : slots) {
            if (!slot.ok) {
                ++row.dropped;
                continue;
            }
            num += slot.err_q;
            den += slot.err_w;
        }
        if (row.dropped == opts.S) {
            std::ostringstream os;
            os << "monte_carlo: all replications failed at rho=" << point.rho
               << " d=" << point.d << " T=" << point.T;
            throw std::runtime_error(os.str());
        }
        row.e_overall = arma::accu(num) / arma::accu(den);
        row.e_per_param = num / den;
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                .count();
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace mwlse
