#include <catch2/catch_amalgamated.hpp>

#include "kdif/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

using Catch::Approx;

TEST_CASE("generator is deterministic per seed", "[rng]") {
    kdif::Rng a(12345), b(12345), c(54321);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        any_diff = any_diff || (va != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("uniform draws live in [0,1) and average to one half", "[rng]") {
    kdif::Rng rng(7);
    double sum = 0.0;
    bool in_range = true;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        in_range = in_range && (u >= 0.0 && u < 1.0);
        sum += u;
    }
    CHECK(in_range);
    // sd of the mean is 1/sqrt(12 n) ~ 0.0009; allow 5 sigma.
    CHECK(sum / n == Approx(0.5).margin(0.005));
}

TEST_CASE("normal draws match the first two moments", "[rng]") {
    kdif::Rng rng(99);
    const int n = 100000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    CHECK(mean == Approx(0.0).margin(0.016));   // 5 sigma of the mean
    CHECK(var == Approx(1.0).margin(0.03));

    SECTION("location-scale version") {
        kdif::Rng r2(99);
        kdif::Rng r3(99);
        for (int i = 0; i < 100; ++i) {
            CHECK(r2.normal(2.0, 3.0) == Approx(2.0 + 3.0 * r3.normal()).margin(1e-12));
        }
    }
}

TEST_CASE("bernoulli frequency tracks p", "[rng]") {
    kdif::Rng rng(3);
    const int n = 50000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3) ? 1 : 0;
    CHECK(static_cast<double>(hits) / n == Approx(0.3).margin(0.011));
    kdif::Rng r2(4);
    for (int i = 0; i < 100; ++i) {
        CHECK_FALSE(r2.bernoulli(0.0));
        CHECK(r2.bernoulli(1.0));
    }
}

TEST_CASE("discrete sampling follows the cumulative weights", "[rng]") {
    // cumulative masses 0.2, 0.5, 1.0 -> probabilities 0.2, 0.3, 0.5
    const std::vector<double> cum{0.2, 0.5, 1.0};
    kdif::Rng rng(11);
    const int n = 60000;
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) ++counts[rng.discrete(cum)];
    CHECK(static_cast<double>(counts[0]) / n == Approx(0.2).margin(0.01));
    CHECK(static_cast<double>(counts[1]) / n == Approx(0.3).margin(0.01));
    CHECK(static_cast<double>(counts[2]) / n == Approx(0.5).margin(0.01));
}

TEST_CASE("derived streams are reproducible and distinct", "[rng]") {
    kdif::Rng a1 = kdif::derive_stream(42, 1, 2, 3);
    kdif::Rng a2 = kdif::derive_stream(42, 1, 2, 3);
    kdif::Rng b = kdif::derive_stream(42, 1, 2, 4);
    kdif::Rng c = kdif::derive_stream(43, 1, 2, 3);
    bool same = true, diff_b = false, diff_c = false;
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t v = a1.next_u64();
        same = same && (v == a2.next_u64());
        diff_b = diff_b || (v != b.next_u64());
        diff_c = diff_c || (v != c.next_u64());
    }
    CHECK(same);
    CHECK(diff_b);
    CHECK(diff_c);
}

TEST_CASE("mix64 scrambles and separates nearby inputs", "[rng]") {
    CHECK(kdif::mix64(0) != 0);
    CHECK(kdif::mix64(1) != kdif::mix64(2));
    // same input, same output
    CHECK(kdif::mix64(0xDEADBEEF) == kdif::mix64(0xDEADBEEF));
}
