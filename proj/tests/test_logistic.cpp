#include <catch2/catch_amalgamated.hpp>

#include "kdif/logistic.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "kdif/math.hpp"
#include "kdif/rng.hpp"

using Catch::Approx;

TEST_CASE("logistic fit reproduces an independently optimized 8-point MLE", "[logistic]") {
    const std::vector<double> x{-1.2, -0.7, -0.3, 0.1, 0.4, 0.8, 1.3, 2.0};
    const std::vector<double> y{0, 0, 1, 0, 1, 1, 0, 1};
    std::vector<double> design;
    for (const double xi : x) {
        design.push_back(1.0);
        design.push_back(xi);
    }
    const auto fit = kdif::fit_logistic(design, 2, y);
    CHECK(fit.converged);
    CHECK_FALSE(fit.separation);
    REQUIRE(fit.beta.size() == 2);
    CHECK(fit.beta[0] == Approx(-0.2906136673).margin(2e-7));
    CHECK(fit.beta[1] == Approx(1.0108851113).margin(2e-7));
    CHECK(fit.log_likelihood == Approx(-4.7496255194).margin(1e-8));
}

TEST_CASE("intercept-only fit equals the logit of the sample mean", "[logistic]") {
    const std::vector<double> y{1, 1, 1, 1, 1, 0, 0, 0};
    const std::vector<double> design(8, 1.0);
    const auto fit = kdif::fit_logistic(design, 1, y);
    CHECK(fit.converged);
    CHECK(fit.beta[0] == Approx(0.510825623766).margin(1e-9));
    CHECK(fit.log_likelihood == Approx(-5.292505905264).margin(1e-10));
}

TEST_CASE("perfect separation is detected and bounded", "[logistic]") {
    // y = 1 exactly when x > 0: the MLE diverges.
    std::vector<double> design;
    std::vector<double> y;
    for (const double xi : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
        design.push_back(1.0);
        design.push_back(xi);
        y.push_back(xi > 0.0 ? 1.0 : 0.0);
    }
    const auto fit = kdif::fit_logistic(design, 2, y);
    CHECK(fit.separation);
    CHECK(fit.iterations < 100);
    // The fit stops on the first step that crosses the logit limit, so the
    // final coefficients may overshoot it by one Newton step but stay finite
    // and moderate instead of running off toward infinity.
    for (const double b : fit.beta) {
        CHECK(std::isfinite(b));
        CHECK(std::fabs(b) <= 100.0);
    }
}

TEST_CASE("input validation", "[logistic]") {
    CHECK_THROWS_AS(kdif::fit_logistic(std::vector<double>{1.0, 2.0, 3.0}, 2,
                                       std::vector<double>{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(kdif::lrt_dif(std::vector<double>{1.0}, std::vector<std::uint8_t>{0, 1},
                                  std::vector<double>{1.0, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("likelihood-ratio screen is exactly zero for mirrored groups", "[logistic]") {
    // Both groups share identical (score, response) pairs, so the group and
    // interaction coefficients are zero at the optimum and the deviance gap
    // vanishes.
    const std::vector<double> base_scores{-1.5, -0.8, -0.2, 0.3, 0.9, 1.6};
    const std::vector<double> base_y{0, 0, 1, 0, 1, 1};
    std::vector<double> scores;
    std::vector<double> y;
    std::vector<std::uint8_t> group;
    for (int g = 0; g < 2; ++g) {
        for (std::size_t i = 0; i < base_scores.size(); ++i) {
            scores.push_back(base_scores[i]);
            y.push_back(base_y[i]);
            group.push_back(static_cast<std::uint8_t>(g));
        }
    }
    const auto lrt = kdif::lrt_dif(scores, group, y);
    CHECK(lrt.df == 2);
    CHECK(lrt.chi2 == Approx(0.0).margin(1e-8));
    CHECK(lrt.p == Approx(1.0).margin(1e-8));
    CHECK(lrt.converged);
}

TEST_CASE("likelihood-ratio screen flags a strong group effect", "[logistic]") {
    // Group 1 endorses far more often at every score level.
    kdif::Rng rng(314);
    std::vector<double> scores;
    std::vector<double> y;
    std::vector<std::uint8_t> group;
    for (int g = 0; g < 2; ++g) {
        for (int i = 0; i < 150; ++i) {
            const double s = rng.normal();
            const double p = kdif::expit(s + (g == 1 ? 1.8 : 0.0));
            scores.push_back(s);
            y.push_back(rng.bernoulli(p) ? 1.0 : 0.0);
            group.push_back(static_cast<std::uint8_t>(g));
        }
    }
    const auto lrt = kdif::lrt_dif(scores, group, y);
    CHECK(lrt.chi2 > 10.0);
    CHECK(lrt.p < 0.01);

    SECTION("p matches the survival function of the statistic") {
        CHECK(lrt.p == Approx(kdif::chi2_sf(lrt.chi2, 2)).margin(1e-14));
    }
}
