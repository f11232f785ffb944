#include <catch2/catch_amalgamated.hpp>

#include "kdif/math.hpp"

#include <cmath>
#include <vector>

using Catch::Approx;

TEST_CASE("expit basics and stability", "[math]") {
    CHECK(kdif::expit(0.0) == Approx(0.5));
    CHECK(kdif::expit(1.0) == Approx(0.731058578630005).epsilon(1e-12));
    CHECK(kdif::expit(-1.0) == Approx(1.0 - 0.731058578630005).epsilon(1e-12));
    // No overflow at extreme arguments.
    CHECK(kdif::expit(800.0) == Approx(1.0));
    CHECK(kdif::expit(-800.0) == Approx(0.0).margin(1e-300));

    SECTION("logit inverts expit") {
        for (double p : {0.01, 0.2, 0.5, 0.85, 0.999}) {
            CHECK(kdif::logit(p) == Approx(-kdif::logit(1.0 - p)).margin(1e-12));
            CHECK(kdif::expit(kdif::logit(p)) == Approx(p).epsilon(1e-12));
        }
    }
    SECTION("logit rejects values outside (0,1)") {
        CHECK_THROWS_AS(kdif::logit(0.0), std::domain_error);
        CHECK_THROWS_AS(kdif::logit(1.0), std::domain_error);
        CHECK_THROWS_AS(kdif::logit(-0.2), std::domain_error);
    }
}

TEST_CASE("normal density and distribution", "[math]") {
    CHECK(kdif::normal_pdf(0.0) == Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(kdif::normal_pdf(1.0) == Approx(0.24197072451914337).epsilon(1e-14));
    CHECK(kdif::normal_cdf(0.0) == Approx(0.5).margin(1e-15));
    CHECK(kdif::normal_cdf(1.959963984540054) == Approx(0.975).margin(1e-12));
    CHECK(kdif::normal_cdf(-1.0) + kdif::normal_cdf(1.0) == Approx(1.0).margin(1e-14));
}

TEST_CASE("normal quantile matches reference values", "[math]") {
    CHECK(kdif::normal_quantile(0.5) == Approx(0.0).margin(1e-14));
    CHECK(kdif::normal_quantile(0.975) == Approx(1.959963984540).margin(1e-10));
    CHECK(kdif::normal_quantile(0.025) == Approx(-1.959963984540).margin(1e-10));
    CHECK(kdif::normal_quantile(1e-8) == Approx(-5.612001244175).margin(1e-9));
    CHECK(kdif::normal_quantile(0.99999) == Approx(4.264890793924).margin(1e-9));

    SECTION("roundtrip through the CDF") {
        for (double p : {0.001, 0.05, 0.31, 0.5, 0.77, 0.9999}) {
            CHECK(kdif::normal_cdf(kdif::normal_quantile(p)) == Approx(p).margin(1e-12));
        }
    }
    SECTION("rejects p outside (0,1)") {
        CHECK_THROWS_AS(kdif::normal_quantile(0.0), std::domain_error);
        CHECK_THROWS_AS(kdif::normal_quantile(1.0), std::domain_error);
    }
}

TEST_CASE("chi-squared survival function", "[math]") {
    // Reference values from an independent implementation of the regularized
    // incomplete gamma function.
    CHECK(kdif::chi2_sf(11.411, 2) == Approx(3.327613162529e-03).epsilon(1e-10));
    CHECK(kdif::chi2_sf(5.99146, 2) == Approx(5.000011367783e-02).epsilon(1e-10));
    CHECK(kdif::chi2_sf(3.84146, 1) == Approx(4.999996483375e-02).epsilon(1e-10));
    CHECK(kdif::chi2_sf(0.5, 4) == Approx(9.735009788393e-01).epsilon(1e-10));
    CHECK(kdif::chi2_sf(0.0, 2) == Approx(1.0));

    SECTION("two df has the closed form exp(-x/2)") {
        for (double x : {0.1, 1.0, 4.0, 20.0}) {
            CHECK(kdif::chi2_sf(x, 2) == Approx(std::exp(-x / 2.0)).epsilon(1e-12));
        }
    }
    SECTION("edge arguments") {
        // The survival function of a non-negative variate is 1 at or below 0.
        CHECK(kdif::chi2_sf(-1.0, 2) == 1.0);
        CHECK(kdif::chi2_sf(0.0, 5) == 1.0);
        CHECK_THROWS_AS(kdif::chi2_sf(1.0, 0), std::domain_error);
    }
}

TEST_CASE("trapezoid rule and linspace", "[math]") {
    const auto xs = kdif::linspace(0.0, 1.0, 101);
    REQUIRE(xs.size() == 101);
    CHECK(xs.front() == Approx(0.0));
    CHECK(xs.back() == Approx(1.0));
    CHECK(xs[50] == Approx(0.5).margin(1e-15));

    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = xs[i] * xs[i];
    // integral of x^2 on [0,1] is 1/3; trapezoid error is O(h^2).
    CHECK(kdif::trapezoid(xs, ys) == Approx(1.0 / 3.0).margin(2e-5));

    std::vector<double> flat(xs.size(), 2.5);
    CHECK(kdif::trapezoid(xs, flat) == Approx(2.5).margin(1e-12));
}
