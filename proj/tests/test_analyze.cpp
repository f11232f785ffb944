#include <catch2/catch_amalgamated.hpp>

#include "kdif/analyze.hpp"

#include <map>
#include <vector>

#include "kdif/simulation.hpp"

using Catch::Approx;

namespace {

kdif::ResponseMatrix simulated_matrix(std::size_t n, std::uint64_t seed) {
    kdif::Scenario sc = kdif::dif_scenario(kdif::DifSource::b);
    sc.n = n;
    kdif::Rng rng(seed);
    return kdif::generate_responses(sc, rng).rm;
}

}  // namespace

TEST_CASE("analysis emits one result row per item, method and zeta", "[analyze]") {
    const auto rm = simulated_matrix(160, 31337);
    kdif::AnalyzeOptions opt;
    opt.methods = {kdif::Method::np_fixed, kdif::Method::logistic};
    opt.zetas = {0.26, 0.32};
    opt.bootstrap_B = 30;
    opt.jobs = 3;

    const auto report = kdif::analyze_dataset(rm, opt);
    CHECK(report.results.size() == rm.items * 2 * 2);
    // 101-point curve per group, item and zeta.
    CHECK(report.curves.size() == rm.items * 2 * 101 * 2);

    // Rows arrive ordered by (zeta, item, method).
    CHECK(report.results[0].item == 0);
    CHECK(report.results[0].method == kdif::Method::np_fixed);
    CHECK(report.results[1].item == 0);
    CHECK(report.results[1].method == kdif::Method::logistic);
    CHECK(report.results[2].item == 1);
    for (const auto& r : report.results) {
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);
        CHECK(r.reject == (r.p_value < opt.alpha));
    }

    SECTION("curves stay inside the unit interval") {
        for (const auto& c : report.curves) {
            CHECK(c.irc >= 0.0);
            CHECK(c.irc <= 1.0);
        }
    }
}

TEST_CASE("decile bins partition each group", "[analyze]") {
    const auto rm = simulated_matrix(120, 99);
    kdif::AnalyzeOptions opt;
    opt.methods = {kdif::Method::logistic};

    const auto report = kdif::analyze_dataset(rm, opt);
    // Per item and group the bin counts add back to the group size.
    std::map<std::pair<std::size_t, std::string>, std::size_t> totals;
    for (const auto& p : report.proportions) {
        CHECK(p.decile >= 1);
        CHECK(p.decile <= 10);
        CHECK(p.proportion >= 0.0);
        CHECK(p.proportion <= 1.0);
        totals[{p.item, p.group}] += p.count;
    }
    for (const auto& [key, total] : totals) {
        CHECK(total == 60);
    }
    CHECK(totals.size() == rm.items * 2);
}

TEST_CASE("analysis rejects unusable configurations", "[analyze]") {
    const auto rm = simulated_matrix(60, 3);
    kdif::AnalyzeOptions opt;

    SECTION("true weights need known curves") {
        opt.methods = {kdif::Method::np_optimal_true};
        CHECK_THROWS_WITH(kdif::analyze_dataset(rm, opt),
                          Catch::Matchers::ContainsSubstring("np_optimal_true"));
    }
    SECTION("empty method list") {
        opt.methods.clear();
        CHECK_THROWS_AS(kdif::analyze_dataset(rm, opt), std::invalid_argument);
    }
    SECTION("alpha bounds") {
        opt.alpha = 0.0;
        CHECK_THROWS_AS(kdif::analyze_dataset(rm, opt), std::invalid_argument);
    }
    SECTION("empty zeta list") {
        opt.zetas.clear();
        CHECK_THROWS_AS(kdif::analyze_dataset(rm, opt), std::invalid_argument);
    }
}

TEST_CASE("planted DIF is flagged and results are job-count invariant", "[analyze]") {
    const auto rm = simulated_matrix(300, 424242);
    kdif::AnalyzeOptions opt;
    opt.bootstrap_B = 100;
    opt.seed = 5;

    opt.jobs = 1;
    const auto serial = kdif::analyze_dataset(rm, opt);
    opt.jobs = 8;
    const auto parallel = kdif::analyze_dataset(rm, opt);

    REQUIRE(serial.results.size() == parallel.results.size());
    for (std::size_t i = 0; i < serial.results.size(); ++i) {
        CHECK(serial.results[i].statistic == parallel.results[i].statistic);
        CHECK(serial.results[i].p_value == parallel.results[i].p_value);
    }

    // The studied item sits at index 0 and carries strong uniform DIF; every
    // default method should flag it at n=300.
    std::size_t flagged = 0;
    for (const auto& r : serial.results) {
        if (r.item == 0 && r.reject) ++flagged;
    }
    CHECK(flagged == 3);
}
