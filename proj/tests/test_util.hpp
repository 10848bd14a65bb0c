#ifndef MWLSE_TEST_UTIL_HPP
#define MWLSE_TEST_UTIL_HPP

#include <armadillo>

#include "mwlse/model.hpp"
#include "mwlse/rng.hpp"
#include "mwlse/types.hpp"

namespace test_util {

// Random parameters satisfying the family constraints; the combined
// infinity norm is scaled to `persistence`.
inline mwlse::Theta random_stable_theta(const mwlse::ModelSpec& spec, mwlse::Rng& rng,
                                        double persistence = 0.6) {
    const int de = spec.effective_dim();
    mwlse::Theta theta;
    theta.c.set_size(de);
    theta.A.zeros(de, de);
    theta.B.zeros(de, de);
    for (int i = 0; i < de; ++i) theta.c(i) = 0.2 + 0.6 * rng.uniform();

    const int d = spec.d;
    for (int j = 0; j < spec.blocks(); ++j) {
        const int off = j * d;
        for (int i = 0; i < d; ++i) {
            for (int l = 0; l < d; ++l) {
                if (!spec.diagonal_A || i == l) theta.A(off + i, off + l) = rng.uniform();
                theta.B(off + i, off + l) = rng.uniform();
            }
        }
    }
    // scale against the norm that the family constraint uses: blocks are
    // summed for categorical specs
    arma::mat agg(d, d, arma::fill::zeros);
    for (int j = 0; j < spec.blocks(); ++j) {
        const arma::span sp(static_cast<arma::uword>(j * d),
                            static_cast<arma::uword>((j + 1) * d - 1));
        agg += arma::abs(theta.A(sp, sp)) + arma::abs(theta.B(sp, sp));
    }
    const double norm = arma::norm(agg, "inf");
    if (norm > 0) {
        theta.A *= persistence / norm;
        theta.B *= persistence / norm;
    }
    if (spec.family != mwlse::Family::count) {
        // keep ||C + A + B||_inf safely below one
        arma::vec csum(d, arma::fill::zeros);
        for (int j = 0; j < spec.blocks(); ++j)
            csum += theta.c.subvec(j * d, (j + 1) * d - 1);
        theta.c *= 0.3 * (1.0 - persistence) / arma::max(csum);
    }
    return theta;
}

// Random panel in the family domain (not from the model, just valid inputs).
inline arma::mat random_panel(const mwlse::ModelSpec& spec, arma::uword T,
                              mwlse::Rng& rng, double count_scale = 4.0) {
    const auto de = static_cast<arma::uword>(spec.effective_dim());
    arma::mat Y(T, de);
    for (arma::uword t = 0; t < T; ++t)
        for (arma::uword i = 0; i < de; ++i) {
            if (spec.family == mwlse::Family::count)
                Y(t, i) = std::floor(count_scale * rng.uniform());
            else
                Y(t, i) = rng.uniform() < 0.5 ? 0.0 : 1.0;
        }
    return Y;
}

inline arma::mat m11(double v) {
    arma::mat m(1, 1);
    m(0, 0) = v;
    return m;
}

inline arma::mat colmat(const arma::vec& v) { return arma::mat(v); }

inline double max_abs_diff(const arma::vec& a, const arma::vec& b) {
    return arma::norm(a - b, "inf");
}

}  // namespace test_util

#endif
