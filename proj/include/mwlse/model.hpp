#ifndef MWLSE_MODEL_HPP
#define MWLSE_MODEL_HPP

#include <armadillo>

#include "mwlse/types.hpp"

namespace mwlse {

// Packing order is fixed everywhere: c, then A (row-major per block, or the
// diagonal when diagonal_A), then B (row-major per block).
arma::vec pack_params(const Theta& theta, const ModelSpec& spec);
Theta unpack_params(const arma::vec& flat, const ModelSpec& spec);

// Positions of the packed entries, used to build mean Jacobians and to
// label parameters in reports.
struct PackEntry {
    char kind;   // 'c', 'a' or 'b'
    int row;     // row in the effective-dim system
    int col;     // column (equals row for 'c')
};
const std::vector<PackEntry>& pack_layout(const ModelSpec& spec);
std::vector<std::string> param_names(const ModelSpec& spec);

// Family-specific parameter constraints with per-constraint slack.
// count: c > 0, A >= 0, B >= 0.
// binary: additionally ||C + A + B||_inf < 1 with C = diag(c).
// categorical_stacked: non-negativity, block-diagonal A and B, and
//   ||sum_j (C_j + A_j + B_j)||_inf < 1 over the category blocks.
ConstraintReport check_constraints(const ModelSpec& spec, const Theta& theta);

// Fixed point (I - A - B)^{-1} c of the recursion; throws on singularity.
arma::vec stationary_mean(const Theta& theta);

// Conditional-mean path: row 1 = mean_init, then the linear recursion.
// Y is T x effective_dim; the result has the same shape.
arma::mat mean_recursion(const ModelSpec& spec, const Theta& theta,
                         const arma::mat& Y, const arma::vec& mean_init);

// d(mean_t)/d(theta'): one effective_dim x param_count slice per t.
// Slice 1 is zero (the initial mean does not depend on theta).
arma::cube mean_jacobian(const ModelSpec& spec, const Theta& theta,
                         const arma::mat& Y, const arma::vec& mean_init);

// Per-coordinate sample mean of Y; the estimation-side initial mean.
arma::vec sample_mean_init(const arma::mat& Y);

// Domain check of an observation panel against the spec family.
void validate_series(const ModelSpec& spec, const arma::mat& Y);

namespace detail {

// Streams (t, mean_row, J_t) over t = 0..T-1 without storing the Jacobian
// path; J_t is effective_dim x param_count. Visitor: f(t, mean_row, J).
template <typename F>
void scan_mean_jacobian(const ModelSpec& spec, const Theta& theta,
                        const arma::mat& Y, const arma::vec& mean_init, F&& f) {
    const auto& layout = pack_layout(spec);
    const int de = spec.effective_dim();
    const int m = spec.param_count();
    const arma::uword T = Y.n_rows;

    arma::vec mean = mean_init;
    arma::mat J(de, m, arma::fill::zeros);
    arma::mat direct(de, m);
    f(arma::uword{0}, mean, J);
    for (arma::uword t = 1; t < T; ++t) {
        arma::vec mean_prev = mean;
        mean = theta.c + theta.A * mean_prev + theta.B * Y.row(t - 1).t();
        direct.zeros();
        for (int h = 0; h < m; ++h) {
            const PackEntry& e = layout[static_cast<std::size_t>(h)];
            switch (e.kind) {
                case 'c': direct(e.row, h) = 1.0; break;
                case 'a': direct(e.row, h) = mean_prev(e.col); break;
                default:  direct(e.row, h) = Y(t - 1, static_cast<arma::uword>(e.col)); break;
            }
        }
        J = direct + theta.A * J;
        f(t, mean, J);
    }
}

}  // namespace detail
}  // namespace mwlse

#endif
