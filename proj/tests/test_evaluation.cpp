#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mwlse/dgp.hpp"
#include "mwlse/evaluation.hpp"
#include "mwlse/fit.hpp"
#include "mwlse/model.hpp"
#include "mwlse/rng.hpp"
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

}  // namespace

TEST_CASE("relative mse") {
    SUBCASE("identical estimate sets give exactly one") {
        arma::mat est(5, 3, arma::fill::randu);
        est += 0.1;
        const arma::vec theta0(3, arma::fill::zeros);
        const RelativeMse e = relative_mse(est, est, theta0);
        CHECK(e.overall == 1.0);
        for (double v : e.per_param) CHECK(v == 1.0);
    }
    SUBCASE("hand-computed ratio") {
        const arma::mat a = test_util::colmat({2.0, 2.0});
        const arma::mat b = test_util::colmat({1.0, 1.0});
        const RelativeMse e = relative_mse(a, b, arma::vec{0.0});
        CHECK(e.overall == doctest::Approx(4.0).epsilon(1e-14));
    }
    SUBCASE("matches an independent accumulation") {
        Rng rng(61);
        arma::mat a(20, 4), b(20, 4);
        for (auto& v : a) v = rng.uniform();
        for (auto& v : b) v = rng.uniform();
        arma::vec theta0(4);
        for (auto& v : theta0) v = rng.uniform();
        const RelativeMse e = relative_mse(a, b, theta0);
        double num = 0.0, den = 0.0;
        for (int s = 0; s < 20; ++s)
            for (int h = 0; h < 4; ++h) {
                num += std::pow(a(s, h) - theta0(h), 2);
                den += std::pow(b(s, h) - theta0(h), 2);
            }
        CHECK(e.overall == doctest::Approx(num / den).epsilon(1e-12));
    }
    SUBCASE("zero denominator throws") {
        const arma::mat a = test_util::m11(1.0);
        const arma::mat b = test_util::m11(0.0);
        CHECK_THROWS_AS(relative_mse(a, b, arma::vec{0.0}), std::domain_error);
    }
}

TEST_CASE("pearson residuals") {
    SUBCASE("perfect fit gives zeros in both modes") {
        arma::mat Y = {{1.0, 0.0}, {0.0, 1.0}};
        arma::mat nu(2, 2, arma::fill::value(0.25));
        CHECK(arma::norm(pearson_residuals(Y, Y, nu, ResidualMode::conventional), "inf") ==
              0.0);
        CHECK(arma::norm(pearson_residuals(Y, Y, nu, ResidualMode::literal), "inf") == 0.0);
    }
    SUBCASE("hand-computed values") {
        const arma::mat Y = test_util::m11(1.0);
        const arma::mat p = test_util::m11(0.5);
        const arma::mat nu = test_util::m11(0.25);
        CHECK(pearson_residuals(Y, p, nu, ResidualMode::conventional)(0, 0) ==
              doctest::Approx(1.0));
        CHECK(pearson_residuals(Y, p, nu, ResidualMode::literal)(0, 0) ==
              doctest::Approx(2.0));
    }
    SUBCASE("conventional residuals of a well-specified fit have unit variance") {
        ModelSpec spec{Family::binary, 2, 2, false};
        Theta theta;
        theta.c = {0.25, 0.3};
        theta.A = 0.2 * arma::eye(2, 2);
        theta.B = {{0.15, 0.05}, {0.05, 0.15}};
        REQUIRE(check_constraints(spec, theta).ok);
        SimConfig cfg;
        cfg.T = 5000;
        cfg.seed = 62;
        const arma::mat Y = simulate_binary(spec, theta, CopulaSpec{0.4}, cfg);
        const FitResult fit = fit_qmle(spec, Y);
        REQUIRE(fit.converged);
        const arma::mat p = arma::clamp(fit.fitted_means, kMeanClampLo, kMeanClampHi);
        const arma::mat nu = p % (1.0 - p);
        const arma::mat res = pearson_residuals(Y, fit.fitted_means, nu,
                                                ResidualMode::conventional);
        for (arma::uword i = 0; i < 2; ++i) {
            CHECK(arma::var(res.col(i)) == doctest::Approx(1.0).epsilon(0.15));
        }
    }
}

TEST_CASE("sample autocorrelation") {
    SUBCASE("alternating series has lag-1 near -1") {
        arma::vec x(400);
        for (arma::uword t = 0; t < 400; ++t) x(t) = t % 2 ? 1.0 : -1.0;
        const AcfResult r = acf(x, 3);
        CHECK(r.values(0) == doctest::Approx(-1.0).epsilon(0.01));
    }
    SUBCASE("white noise stays inside the band") {
        Rng rng(63);
        arma::vec x(10000);
        for (auto& v : x) v = rng.normal();
        const AcfResult r = acf(x, 20);
        int inside = 0;
        for (double v : r.values)
            if (std::abs(v) <= r.band) ++inside;
        CHECK(inside >= 19);   // >= 93% of the first 20 lags
        CHECK(r.band == doctest::Approx(1.96 / std::sqrt(10000.0)));
    }
    SUBCASE("matches a two-pass autocovariance routine") {
        Rng rng(64);
        arma::vec x(300);
        for (auto& v : x) v = rng.uniform() + 0.2 * v;
        const AcfResult r = acf(x, 10);
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= 300.0;
        double var = 0.0;
        for (double v : x) var += (v - mean) * (v - mean);
        for (int k = 1; k <= 10; ++k) {
            double cov = 0.0;
            for (int t = k; t < 300; ++t) cov += (x(t) - mean) * (x(t - k) - mean);
            CHECK(r.values(k - 1) == doctest::Approx(cov / var).epsilon(1e-12));
        }
    }
    SUBCASE("acf values are bounded by one") {
        Rng rng(65);
        for (int rep = 0; rep < 5; ++rep) {
            arma::vec x(50);
            for (auto& v : x) v = rng.uniform();
            const AcfResult r = acf(x, 20);
            CHECK(arma::abs(r.values).max() <= 1.0 + 1e-12);
        }
    }
    SUBCASE("constant series is rejected") {
        CHECK_THROWS_AS(acf(arma::vec(10, arma::fill::ones), 2), std::domain_error);
    }
}

TEST_CASE("mean absolute error") {
    SUBCASE("perfect prediction") {
        arma::mat Y = {{1.0, 0.0}, {0.0, 1.0}};
        const MaeResult r = mae(Y, Y);
        CHECK(r.overall == 0.0);
    }
    SUBCASE("hand-computed") {
        arma::mat Y = {{1.0, 0.0}};
        arma::mat p = {{0.6, 0.4}};
        const MaeResult r = mae(Y, p);
        CHECK(r.per_series(0) == doctest::Approx(0.4));
        CHECK(r.per_series(1) == doctest::Approx(0.4));
        CHECK(r.overall == doctest::Approx(0.4));
    }
    SUBCASE("invariant to permuting the time index") {
        Rng rng(66);
        arma::mat Y(30, 2), p(30, 2);
        for (auto& v : Y) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
        for (auto& v : p) v = rng.uniform();
        const MaeResult a = mae(Y, p);
        arma::uvec perm = arma::regspace<arma::uvec>(0, 29);
        // deterministic shuffle
        for (arma::uword i = 29; i > 0; --i) {
            const auto j = static_cast<arma::uword>(rng.uniform() * (i + 1));
            std::swap(perm(i), perm(j));
        }
        const MaeResult b = mae(Y.rows(perm), p.rows(perm));
        CHECK(a.overall == doctest::Approx(b.overall).epsilon(1e-15));
        CHECK(arma::norm(a.per_series - b.per_series, "inf") < 1e-15);
    }
}

TEST_CASE("monte carlo harness") {
    McOptions opts;
    opts.S = 6;
    opts.burn_in = 100;
    opts.master_seed = 99;
    opts.plan.correlation = WorkingCorrelation::eqc;
    opts.plan.r_estimator = REstimator::max_pairwise;
    opts.theta0.emplace(2, mingarch_theta0());
    const std::vector<McGridPoint> grid = {{0.6, 2, 80}};

    SUBCASE("identical reports for any thread count and across runs") {
        opts.threads = 1;
        const McReport serial = monte_carlo(grid, opts);
        const McReport serial2 = monte_carlo(grid, opts);
        opts.threads = 4;
        const McReport pooled = monte_carlo(grid, opts);
        REQUIRE(serial.rows.size() == 1);
        CHECK(serial.rows[0].e_overall == serial2.rows[0].e_overall);
        CHECK(serial.rows[0].e_overall == pooled.rows[0].e_overall);
        CHECK(arma::norm(serial.rows[0].e_per_param - pooled.rows[0].e_per_param,
                         "inf") == 0.0);
        CHECK(serial.rows[0].dropped == pooled.rows[0].dropped);
    }

    SUBCASE("missing theta0 is reported") {
        const std::vector<McGridPoint> bad = {{0.6, 3, 80}};
        CHECK_THROWS_AS(monte_carlo(bad, opts), std::invalid_argument);
    }
}
