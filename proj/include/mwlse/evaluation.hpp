#ifndef MWLSE_EVALUATION_HPP
#define MWLSE_EVALUATION_HPP

#include <armadillo>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mwlse/fit.hpp"
#include "mwlse/types.hpp"
#include "mwlse/weights.hpp"

namespace mwlse {

// Relative mean square error sum_s ||A_s - theta0||^2 / sum_s ||B_s - theta0||^2.
// Values above 1 favor the second estimator.
struct RelativeMse {
    double overall = arma::datum::nan;
    arma::vec per_param;
};
RelativeMse relative_mse(const arma::mat& estimates_a, const arma::mat& estimates_b,
                         const arma::vec& theta0);

enum class ResidualMode { conventional, literal };

// Pearson residuals (Y - fitted)/sqrt(nu) (conventional) or (Y - fitted)/nu
// (literal).
arma::mat pearson_residuals(const arma::mat& Y, const arma::mat& fitted,
                            const arma::mat& nu, ResidualMode mode);

// Sample autocorrelations at lags 1..max_lag with the +-1.96/sqrt(T) band.
struct AcfResult {
    arma::vec values;
    double band = arma::datum::nan;
};
AcfResult acf(const arma::vec& series, int max_lag);

// Mean absolute error per series and over all cells.
struct MaeResult {
    arma::vec per_series;
    double overall = arma::datum::nan;
};
MaeResult mae(const arma::mat& Y, const arma::mat& fitted);

// ---- Monte Carlo relative-efficiency harness ----

struct McGridPoint {
    double rho = 0.0;
    int d = 2;
    int T = 100;
};

struct McOptions {
    int S = 100;
    int burn_in = 500;
    long max_events = 1000000;
    std::uint64_t master_seed = 0;
    int threads = 1;
    bool diagonal_a = false;   // fit shape used by both estimators
    WeightPlan plan;
    std::map<int, Theta> theta0;   // generating parameters per dimension
};

struct McRow {
    McGridPoint point;
    int S = 0;
    int dropped = 0;               // replications where a fit did not converge
    double e_overall = arma::datum::nan;
    arma::vec e_per_param;
    double wall_seconds = 0.0;     // console diagnostics only, never serialized
};

struct McReport {
    std::vector<McRow> rows;
    std::uint64_t master_seed = 0;
    int S = 0;
    std::string plan_name;
    std::map<int, arma::vec> theta0_flat;   // echoed generating parameters
};

// Replication s of grid point g simulates with seed derive_seed(master, g, s),
// fits the marginal QMLE and the two-stage estimator, and accumulates the
// relative MSE over the replications where both fits converged. Results are
// identical for any thread count.
McReport monte_carlo(const std::vector<McGridPoint>& grid, const McOptions& opts);

}  // namespace mwlse

#endif
