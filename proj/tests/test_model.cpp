#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "mwlse/model.hpp"
#include "mwlse/rng.hpp"
#include "test_util.hpp"

using namespace mwlse;

TEST_CASE("packing follows the documented order") {
    ModelSpec spec{Family::count, 1, 2, false};
    Theta theta;
    theta.c = {0.5};
    theta.A = test_util::m11(0.3);
    theta.B = test_util::m11(0.2);
    const arma::vec flat = pack_params(theta, spec);
    REQUIRE(flat.n_elem == 3);
    CHECK(flat(0) == 0.5);
    CHECK(flat(1) == 0.3);
    CHECK(flat(2) == 0.2);
}

TEST_CASE("packed length counts") {
    CHECK(ModelSpec{Family::count, 2, 2, true}.param_count() == 8);
    CHECK(ModelSpec{Family::count, 2, 2, false}.param_count() == 10);
    CHECK(ModelSpec{Family::binary, 3, 2, true}.param_count() == 15);
    // categorical with M=3: two blocks of (c, A, B)
    CHECK(ModelSpec{Family::categorical_stacked, 2, 3, false}.param_count() == 4 + 8 + 8);
}

TEST_CASE("pack/unpack round-trips bit-exactly") {
    Rng rng(7);
    const std::vector<ModelSpec> specs = {
        {Family::count, 3, 2, false},
        {Family::binary, 2, 2, true},
        {Family::categorical_stacked, 2, 3, false},
        {Family::categorical_stacked, 2, 4, true},
    };
    for (const auto& spec : specs) {
        for (int rep = 0; rep < 5; ++rep) {
            const Theta theta = test_util::random_stable_theta(spec, rng);
            const arma::vec flat = pack_params(theta, spec);
            REQUIRE(flat.n_elem == static_cast<arma::uword>(spec.param_count()));
            const Theta back = unpack_params(flat, spec);
            CHECK(arma::norm(back.c - theta.c, "inf") == 0.0);
            CHECK(arma::norm(back.A - theta.A, "inf") == 0.0);
            CHECK(arma::norm(back.B - theta.B, "inf") == 0.0);
        }
    }
}

TEST_CASE("pack rejects shape mismatch") {
    ModelSpec spec{Family::count, 2, 2, false};
    Theta theta;
    theta.c = {0.5};
    theta.A = arma::eye(2, 2);
    theta.B = arma::eye(2, 2);
    CHECK_THROWS_AS(pack_params(theta, spec), std::invalid_argument);
    CHECK_THROWS_AS(unpack_params(arma::vec(5, arma::fill::ones), spec),
                    std::invalid_argument);
}

TEST_CASE("mean recursion one-step arithmetic") {
    ModelSpec spec{Family::count, 1, 2, false};
    Theta theta;
    theta.c = {0.5};
    theta.A = test_util::m11(0.3);
    theta.B = test_util::m11(0.2);
    const arma::mat Y = test_util::colmat({2.0, 1.0, 0.0});
    const arma::mat path = mean_recursion(spec, theta, Y, arma::vec{1.0});
    CHECK(path(0, 0) == 1.0);
    CHECK(path(1, 0) == doctest::Approx(1.2).epsilon(1e-14));
    // next step: 0.5 + 0.3*1.2 + 0.2*1.0
    CHECK(path(2, 0) == doctest::Approx(1.06).epsilon(1e-14));
}

TEST_CASE("degenerate recursion returns the intercept") {
    ModelSpec spec{Family::count, 2, 2, false};
    Theta theta;
    theta.c = {1.5, 2.5};
    theta.A = arma::zeros(2, 2);
    theta.B = arma::zeros(2, 2);
    Rng rng(3);
    const arma::mat Y = test_util::random_panel(spec, 20, rng);
    const arma::mat path = mean_recursion(spec, theta, Y, arma::vec{9.0, 9.0});
    for (arma::uword t = 1; t < 20; ++t) {
        CHECK(path(t, 0) == 1.5);
        CHECK(path(t, 1) == 2.5);
    }
}

TEST_CASE("mean recursion equals an independently coded loop") {
    ModelSpec spec{Family::count, 2, 2, false};
    Rng rng(11);
    const Theta theta = test_util::random_stable_theta(spec, rng);
    const arma::mat Y = test_util::random_panel(spec, 50, rng);
    const arma::vec init = sample_mean_init(Y);
    const arma::mat path = mean_recursion(spec, theta, Y, init);

    // plain nested loops, no shared linear algebra
    std::vector<std::vector<double>> ref(50, std::vector<double>(2));
    ref[0] = {init(0), init(1)};
    for (int t = 1; t < 50; ++t)
        for (int i = 0; i < 2; ++i) {
            double v = theta.c(i);
            for (int l = 0; l < 2; ++l)
                v += theta.A(i, l) * ref[t - 1][l] + theta.B(i, l) * Y(t - 1, l);
            ref[t][i] = v;
        }
    for (int t = 0; t < 50; ++t)
        for (int i = 0; i < 2; ++i)
            CHECK(path(t, i) == doctest::Approx(ref[t][i]).epsilon(1e-12));
}

TEST_CASE("jacobian one-step values") {
    ModelSpec spec{Family::count, 1, 2, false};
    Theta theta;
    theta.c = {0.5};
    theta.A = test_util::m11(0.3);
    theta.B = test_util::m11(0.2);
    const arma::mat Y = test_util::colmat({2.0, 1.0});
    const arma::cube J = mean_jacobian(spec, theta, Y, arma::vec{1.0});
    CHECK(arma::norm(J.slice(0), "inf") == 0.0);
    CHECK(J(0, 0, 1) == doctest::Approx(1.0));   // d/dc
    CHECK(J(0, 1, 1) == doctest::Approx(1.0));   // d/da = lambda_1
    CHECK(J(0, 2, 1) == doctest::Approx(2.0));   // d/db = Y_1
}

TEST_CASE("jacobian with A=0 has identity c-blocks") {
    ModelSpec spec{Family::count, 2, 2, false};
    Rng rng(5);
    Theta theta = test_util::random_stable_theta(spec, rng);
    theta.A.zeros();
    const arma::mat Y = test_util::random_panel(spec, 10, rng);
    const arma::cube J = mean_jacobian(spec, theta, Y, sample_mean_init(Y));
    for (arma::uword t = 1; t < 10; ++t) {
        CHECK(J(0, 0, t) == 1.0);
        CHECK(J(1, 1, t) == 1.0);
        CHECK(J(0, 1, t) == 0.0);
        CHECK(J(1, 0, t) == 0.0);
    }
}

TEST_CASE("jacobian matches central finite differences") {
    Rng rng(2024);
    const std::vector<ModelSpec> specs = {
        {Family::count, 2, 2, false},
        {Family::count, 2, 2, true},
        {Family::binary, 2, 2, false},
        {Family::categorical_stacked, 2, 3, true},
    };
    const double h = 1e-6;
    int checked = 0;
    for (const auto& spec : specs) {
        for (int rep = 0; rep < 5; ++rep) {
            const Theta theta = test_util::random_stable_theta(spec, rng);
            const arma::mat Y = test_util::random_panel(spec, 30, rng);
            const arma::vec init = sample_mean_init(Y);
            const arma::vec flat = pack_params(theta, spec);
            const arma::cube J = mean_jacobian(spec, theta, Y, init);
            for (arma::uword p = 0; p < flat.n_elem; ++p) {
                arma::vec up = flat, dn = flat;
                up(p) += h;
                dn(p) -= h;
                const arma::mat f_up =
                    mean_recursion(spec, unpack_params(up, spec), Y, init);
                const arma::mat f_dn =
                    mean_recursion(spec, unpack_params(dn, spec), Y, init);
                const arma::mat fd = (f_up - f_dn) / (2.0 * h);
                for (arma::uword t = 1; t < Y.n_rows; ++t) {
                    for (arma::uword i = 0; i < Y.n_cols; ++i) {
                        const double analytic = J(i, p, t);
                        const double numeric = fd(t, i);
                        const double scale = std::max(1.0, std::abs(analytic));
                        CHECK(std::abs(analytic - numeric) / scale < 1e-5);
                    }
                }
            }
            ++checked;
        }
    }
    CHECK(checked == 20);
}

TEST_CASE("constraint checks") {
    SUBCASE("binary boundary fails the strict norm") {
        ModelSpec spec{Family::binary, 1, 2, false};
        Theta theta;
        theta.c = {0.5};
        theta.A = test_util::m11(0.3);
        theta.B = test_util::m11(0.2);
        CHECK_FALSE(check_constraints(spec, theta).ok);
        theta.c = {0.4};
        CHECK(check_constraints(spec, theta).ok);
    }
    SUBCASE("count rejects negative entries") {
        ModelSpec spec{Family::count, 2, 2, false};
        Rng rng(1);
        Theta theta = test_util::random_stable_theta(spec, rng);
        CHECK(check_constraints(spec, theta).ok);
        theta.B(0, 1) = -0.01;
        const auto rep = check_constraints(spec, theta);
        CHECK_FALSE(rep.ok);
        CHECK(rep.violations.size() == 1);
    }
    SUBCASE("categorical requires block-diagonal A and B") {
        ModelSpec spec{Family::categorical_stacked, 2, 3, false};
        Rng rng(2);
        Theta theta = test_util::random_stable_theta(spec, rng, 0.4);
        CHECK(check_constraints(spec, theta).ok);
        theta.B(0, 3) = 0.05;   // off-block
        CHECK_FALSE(check_constraints(spec, theta).ok);
    }
}

TEST_CASE("stationary mean") {
    SUBCASE("scalar algebra") {
        Theta theta;
        theta.c = {0.5};
        theta.A = test_util::m11(0.3);
        theta.B = test_util::m11(0.2);
        CHECK(stationary_mean(theta)(0) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("identity case") {
        Theta theta;
        theta.c = {1.0, 2.0};
        theta.A = arma::zeros(2, 2);
        theta.B = arma::zeros(2, 2);
        const arma::vec mu = stationary_mean(theta);
        CHECK(mu(0) == 1.0);
        CHECK(mu(1) == 2.0);
    }
    SUBCASE("fixed point residual") {
        ModelSpec spec{Family::count, 3, 2, false};
        Rng rng(17);
        const Theta theta = test_util::random_stable_theta(spec, rng);
        const arma::vec mu = stationary_mean(theta);
        const arma::vec resid = theta.c + theta.A * mu + theta.B * mu - mu;
        CHECK(arma::norm(resid, "inf") < 1e-12);
    }
    SUBCASE("singular system throws") {
        Theta theta;
        theta.c = {1.0};
        theta.A = test_util::m11(0.5);
        theta.B = test_util::m11(0.5);
        CHECK_THROWS_AS(stationary_mean(theta), std::domain_error);
    }
}

TEST_CASE("count means stay positive and bounded under the constraints") {
    ModelSpec spec{Family::count, 2, 2, false};
    Rng rng(77);
    for (int rep = 0; rep < 10; ++rep) {
        const Theta theta = test_util::random_stable_theta(spec, rng);
        REQUIRE(check_constraints(spec, theta).ok);
        const arma::mat Y = test_util::random_panel(spec, 200, rng);
        const arma::mat path = mean_recursion(spec, theta, Y, stationary_mean(theta));
        CHECK(path.is_finite());
        CHECK(path.min() > 0.0);
    }
}

TEST_CASE("binary means stay inside the unit interval") {
    ModelSpec spec{Family::binary, 3, 2, false};
    Rng rng(78);
    for (int rep = 0; rep < 10; ++rep) {
        const Theta theta = test_util::random_stable_theta(spec, rng, 0.5);
        REQUIRE(check_constraints(spec, theta).ok);
        const arma::mat Y = test_util::random_panel(spec, 200, rng);
        const arma::vec init(3, arma::fill::value(0.5));
        const arma::mat path = mean_recursion(spec, theta, Y, init);
        CHECK(path.min() > 0.0);
        CHECK(path.max() < 1.0);
    }
}

TEST_CASE("series validation") {
    ModelSpec count{Family::count, 2, 2, false};
    ModelSpec binary{Family::binary, 2, 2, false};
    arma::mat ok = {{0.0, 1.0}, {2.0, 3.0}};
    CHECK_NOTHROW(validate_series(count, ok));
    arma::mat frac = {{0.5, 1.0}, {2.0, 3.0}};
    CHECK_THROWS(validate_series(count, frac));
    arma::mat bin = {{0.0, 1.0}, {1.0, 0.0}};
    CHECK_NOTHROW(validate_series(binary, bin));
    CHECK_THROWS(validate_series(binary, ok));
    arma::mat one_row = {{0.0, 1.0}};
    CHECK_THROWS(validate_series(binary, one_row));
}
