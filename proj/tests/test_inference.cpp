#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mwlse/dgp.hpp"
#include "mwlse/fit.hpp"
#include "mwlse/inference.hpp"
#include "mwlse/model.hpp"
#include "mwlse/rng.hpp"
#include "mwlse/weights.hpp"
#include "test_util.hpp"

using namespace mwlse;

namespace {

Theta mingarch_theta0() {
    Theta theta;
    theta.c = {0.5, 0.5};
    theta.A = 0.3 * arma::eye(2, 2);
    theta.B = {{0.2, 0.1}, {0.1, 0.2}};
    return theta;
}

arma::cube qmle_weights(const ModelSpec& spec, const Theta& theta, const arma::mat& Y) {
    WeightPlan plan;
    plan.variance_fn =
        spec.family == Family::count ? VarianceFn::identity_mean : VarianceFn::bernoulli;
    return build_weights(spec, theta, plan, Y);
}

}  // namespace

TEST_CASE("sandwich parts match brute-force triple loops") {
    ModelSpec spec{Family::count, 2, 2, false};
    Rng rng(55);
    const Theta theta = test_util::random_stable_theta(spec, rng);
    const arma::mat Y = test_util::random_panel(spec, 50, rng, 6.0);
    arma::cube W(2, 2, 50);
    for (arma::uword t = 0; t < 50; ++t) {
        arma::mat R(2, 2);
        for (auto& v : R) v = rng.uniform() + 0.1;
        W.slice(t) = R * R.t() + arma::eye(2, 2);
    }
    const SandwichParts parts = sandwich_covariance(spec, theta, Y, W);

    const arma::vec init = sample_mean_init(Y);
    const arma::mat path = mean_recursion(spec, theta, Y, init);
    const arma::cube J = mean_jacobian(spec, theta, Y, init);
    const arma::uword m = static_cast<arma::uword>(spec.param_count());
    arma::mat H(m, m, arma::fill::zeros);
    arma::mat I(m, m, arma::fill::zeros);
    for (arma::uword t = 0; t < 50; ++t) {
        arma::vec s(m, arma::fill::zeros);
        for (arma::uword g = 0; g < m; ++g) {
            for (arma::uword h = 0; h < m; ++h) {
                double acc = 0.0;
                for (arma::uword i = 0; i < 2; ++i)
                    for (arma::uword j = 0; j < 2; ++j)
                        acc += J(i, g, t) * W(i, j, t) * J(j, h, t);
                H(g, h) += acc;
            }
            for (arma::uword i = 0; i < 2; ++i)
                for (arma::uword j = 0; j < 2; ++j)
                    s(g) += J(i, g, t) * W(i, j, t) * (Y(t, j) - path(t, j));
        }
        I += s * s.t();
    }
    H /= 50.0;
    I /= 50.0;
    CHECK(arma::norm(parts.H - H, "inf") < 1e-10);
    CHECK(arma::norm(parts.I - I, "inf") < 1e-10);
    const arma::mat G_ref = arma::inv(H) * I * arma::inv(H);
    CHECK(arma::norm(parts.G - G_ref, "inf") < 1e-8);
}

TEST_CASE("sandwich H and I have the right definiteness at a converged fit") {
    ModelSpec spec{Family::count, 2, 2, false};
    SimConfig cfg;
    cfg.T = 500;
    cfg.seed = 71;
    const arma::mat Y = simulate_counts(spec, mingarch_theta0(), CopulaSpec{0.5}, cfg);
    const FitResult fit = fit_qmle(spec, Y);
    REQUIRE(fit.converged);
    const SandwichParts parts =
        sandwich_covariance(spec, fit.theta, Y, qmle_weights(spec, fit.theta, Y));
    CHECK(arma::eig_sym(parts.H).min() > 0.0);
    CHECK(arma::eig_sym(parts.I).min() > -1e-10);
    CHECK(arma::eig_sym(parts.G).min() > -1e-10);
    CHECK_FALSE(parts.ridged);
}

TEST_CASE("covariance is equivariant under coordinate relabeling") {
    ModelSpec spec{Family::count, 2, 2, false};
    SimConfig cfg;
    cfg.T = 400;
    cfg.seed = 72;
    const arma::mat Y = simulate_counts(spec, mingarch_theta0(), CopulaSpec{0.6}, cfg);
    arma::mat Y_swap = Y;
    Y_swap.swap_cols(0, 1);

    const FitResult fa = fit_qmle(spec, Y);
    const FitResult fb = fit_qmle(spec, Y_swap);
    REQUIRE(fa.converged);
    REQUIRE(fb.converged);

    const SandwichParts ga =
        sandwich_covariance(spec, fa.theta, Y, qmle_weights(spec, fa.theta, Y));
    const SandwichParts gb =
        sandwich_covariance(spec, fb.theta, Y_swap, qmle_weights(spec, fb.theta, Y_swap));

    // packing order (c1,c2, A11,A12,A21,A22, B11,...) under the swap 1<->2
    const arma::uvec perm = {1, 0, 5, 4, 3, 2, 9, 8, 7, 6};
    const arma::mat gb_perm = gb.G(perm, perm);
    const double scale = arma::norm(ga.G, "inf");
    CHECK(arma::norm(ga.G - gb_perm, "inf") / scale < 1e-4);
}

TEST_CASE("qmle and matched two-stage standard errors agree at large T") {
    ModelSpec spec{Family::count, 2, 2, false};
    SimConfig cfg;
    cfg.T = 2000;
    cfg.seed = 73;
    const arma::mat Y = simulate_counts(spec, mingarch_theta0(), CopulaSpec{0.5}, cfg);
    const FitResult fq = fit_qmle(spec, Y);
    WeightPlan plan;   // identity correlation, nu = mean
    const FitResult fw = fit_two_stage(spec, Y, plan);
    REQUIRE(fq.converged);
    REQUIRE(fw.converged);
    const arma::vec se_q = standard_errors(
        sandwich_covariance(spec, fq.theta, Y, qmle_weights(spec, fq.theta, Y)), Y.n_rows);
    const arma::vec se_w = standard_errors(
        sandwich_covariance(spec, fw.theta, Y, qmle_weights(spec, fw.theta, Y)), Y.n_rows);
    for (arma::uword h = 0; h < se_q.n_elem; ++h) {
        CHECK(std::abs(se_q(h) - se_w(h)) / se_q(h) < 0.05);
    }
}

TEST_CASE("significance markers") {
    SUBCASE("null estimate carries no marker") {
        const auto s = significance_flags(arma::vec{0.0}, arma::vec{0.1});
        CHECK(s[0].marker.empty());
        CHECK(s[0].p_value == doctest::Approx(1.0));
    }
    SUBCASE("z = 4 reaches the strongest tier") {
        const auto s = significance_flags(arma::vec{0.4}, arma::vec{0.1});
        CHECK(s[0].z == doctest::Approx(4.0));
        CHECK(s[0].marker == "**");
    }
    SUBCASE("tier boundaries") {
        // z = 3.30: p = 9.67e-4 -> weakest tier (dagger)
        CHECK(significance_flags(arma::vec{3.30}, arma::vec{1.0})[0].marker == "†");
        // z = 3.60: p = 3.18e-4 -> middle tier
        CHECK(significance_flags(arma::vec{3.60}, arma::vec{1.0})[0].marker == "*");
        // z = 2.0: p = 0.0455 -> none
        CHECK(significance_flags(arma::vec{2.0}, arma::vec{1.0})[0].marker.empty());
    }
    SUBCASE("non-positive standard error throws") {
        CHECK_THROWS_AS(significance_flags(arma::vec{1.0}, arma::vec{0.0}),
                        std::domain_error);
    }
}
