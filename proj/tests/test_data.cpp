#include <catch2/catch_amalgamated.hpp>

#include "kdif/data.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using Catch::Approx;

namespace {

// Writes content to a scratch file and returns its path.
std::string scratch_csv(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("CSV loader maps items, rows and groups", "[data]") {
    const std::string path = scratch_csv("kdif_basic.csv",
                                         "q1,q2,grp,q3\n"
                                         "1,0,A,1\n"
                                         "0,0,B,1\n"
                                         "1,1,A,0\n"
                                         "0,1,A,1\n");
    const auto rm = kdif::load_response_csv(path, "grp");
    CHECK(rm.n == 4);
    CHECK(rm.items == 3);
    REQUIRE(rm.item_names.size() == 3);
    CHECK(rm.item_names[0] == "q1");
    CHECK(rm.item_names[2] == "q3");
    // A is larger (3 vs 1), so it becomes the reference by default.
    CHECK(rm.reference_label == "A");
    CHECK(rm.focal_label == "B");
    CHECK(rm.group_size(0) == 3);
    CHECK(rm.group_size(1) == 1);
    CHECK(rm.group[0] == 0);
    CHECK(rm.group[1] == 1);
    // The group column is excised; item columns keep file order.
    CHECK(rm.at(0, 0) == 1);
    CHECK(rm.at(0, 2) == 1);
    CHECK(rm.at(2, 1) == 1);
    CHECK(rm.at(3, 0) == 0);

    const auto col = rm.item_column(2);
    REQUIRE(col.size() == 4);
    CHECK(col[0] == 1.0);
    CHECK(col[2] == 0.0);
}

TEST_CASE("reference label can be forced and ties break by appearance", "[data]") {
    const std::string path = scratch_csv("kdif_tie.csv",
                                         "q1,grp\n"
                                         "1,B\n"
                                         "0,A\n"
                                         "1,B\n"
                                         "0,A\n");
    SECTION("tie goes to the first label seen") {
        const auto rm = kdif::load_response_csv(path, "grp");
        CHECK(rm.reference_label == "B");
    }
    SECTION("explicit label wins") {
        const auto rm = kdif::load_response_csv(path, "grp", "A");
        CHECK(rm.reference_label == "A");
        CHECK(rm.focal_label == "B");
        CHECK(rm.group[0] == 1);
        CHECK(rm.group[1] == 0);
    }
    SECTION("unknown label is rejected") {
        CHECK_THROWS_WITH(kdif::load_response_csv(path, "grp", "Z"),
                          Catch::Matchers::ContainsSubstring("Z"));
    }
}

TEST_CASE("CSV loader rejects malformed input", "[data]") {
    SECTION("non-binary cell names row and column") {
        const std::string path = scratch_csv("kdif_bad_cell.csv",
                                             "q1,q2,grp\n"
                                             "1,0,A\n"
                                             "1,2,B\n");
        CHECK_THROWS_WITH(kdif::load_response_csv(path, "grp"),
                          Catch::Matchers::ContainsSubstring("row 3") &&
                              Catch::Matchers::ContainsSubstring("q2"));
    }
    SECTION("missing group column") {
        const std::string path = scratch_csv("kdif_nogrp.csv", "q1,q2\n1,0\n");
        CHECK_THROWS_WITH(kdif::load_response_csv(path, "grp"),
                          Catch::Matchers::ContainsSubstring("grp"));
    }
    SECTION("three group labels") {
        const std::string path = scratch_csv("kdif_3grp.csv",
                                             "q1,grp\n1,A\n0,B\n1,C\n");
        CHECK_THROWS_AS(kdif::load_response_csv(path, "grp"), std::runtime_error);
    }
    SECTION("one group label") {
        const std::string path = scratch_csv("kdif_1grp.csv", "q1,grp\n1,A\n0,A\n");
        CHECK_THROWS_AS(kdif::load_response_csv(path, "grp"), std::runtime_error);
    }
    SECTION("ragged row") {
        const std::string path = scratch_csv("kdif_ragged.csv", "q1,q2,grp\n1,0,A\n1,B\n");
        CHECK_THROWS_WITH(kdif::load_response_csv(path, "grp"),
                          Catch::Matchers::ContainsSubstring("row 3"));
    }
    SECTION("nonexistent file") {
        CHECK_THROWS_AS(kdif::load_response_csv("/nonexistent/x.csv", "grp"),
                        std::runtime_error);
    }
}

TEST_CASE("standardized total score has mean 0 and sample sd 1", "[data]") {
    kdif::ResponseMatrix rm;
    rm.n = 5;
    rm.items = 3;
    // totals: 3, 2, 1, 0, 2
    rm.y = {1, 1, 1,
            1, 1, 0,
            1, 0, 0,
            0, 0, 0,
            0, 1, 1};
    rm.group = {0, 0, 0, 1, 1};
    const auto scores = kdif::standardized_total_score(rm);
    REQUIRE(scores.size() == 5);
    double mean = 0.0, ss = 0.0;
    for (const double s : scores) mean += s;
    mean /= 5.0;
    for (const double s : scores) ss += (s - mean) * (s - mean);
    CHECK(mean == Approx(0.0).margin(1e-14));
    CHECK(ss / 4.0 == Approx(1.0).margin(1e-14));
    // monotone in the raw total
    CHECK(scores[0] > scores[1]);
    CHECK(scores[1] > scores[2]);
    CHECK(scores[2] > scores[3]);
    CHECK(scores[1] == Approx(scores[4]).margin(1e-15));

    SECTION("zero variance is an error") {
        kdif::ResponseMatrix flat;
        flat.n = 3;
        flat.items = 2;
        flat.y = {1, 0, 1, 0, 1, 0};
        flat.group = {0, 1, 0};
        CHECK_THROWS_AS(kdif::standardized_total_score(flat), std::domain_error);
    }
}

TEST_CASE("group split preserves order and reports the reference share", "[data]") {
    kdif::ResponseMatrix rm;
    rm.n = 5;
    rm.items = 1;
    rm.y = {1, 0, 1, 0, 1};
    rm.group = {0, 1, 0, 1, 0};
    const std::vector<double> scores{0.5, -0.2, 0.9, 0.1, -1.0};
    const auto gs = kdif::split_groups(rm, scores);
    CHECK(gs.n0() == 3);
    CHECK(gs.n1() == 2);
    CHECK(gs.lambda_hat == Approx(3.0 / 5.0));
    REQUIRE(gs.idx0.size() == 3);
    CHECK(gs.idx0[1] == 2);
    CHECK(gs.theta0[1] == Approx(0.9));
    CHECK(gs.idx1[0] == 1);
    CHECK(gs.theta1[0] == Approx(-0.2));

    CHECK_THROWS_AS(kdif::split_groups(rm, std::vector<double>{1.0}), std::invalid_argument);
}
