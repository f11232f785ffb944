#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kdif/data.hpp"
#include "kdif/rng.hpp"

// The common evaluation support: all pairwise averages of reference and
// focal matching scores, stored as unique points with multiplicities, plus
// the weighted-resampling reduction that caps its size.

namespace kdif {

// points are ascending and unique; mult[i] > 0; total_mass == sum(mult).
// After reduction total_mass equals the requested sample size and replaces
// n0*n1 in every downstream averaging divisor.
struct SupportSet {
    std::vector<double> points;
    std::vector<double> mult;
    double total_mass = 0.0;
    bool reduced = false;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

// Full support: (theta0_k + theta1_l)/2 over all n0*n1 pairs, deduplicated by
// exact value. Multiplicities sum to n0*n1.
[[nodiscard]] inline SupportSet common_support(const GroupedScores& gs) {
    if (gs.n0() == 0 || gs.n1() == 0) {
        throw std::invalid_argument("common_support: both groups must be non-empty");
    }

    // Collapse each group to distinct values with counts first; the support
    // then needs only one pass over distinct pairs.
    const auto distinct = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        std::vector<std::pair<double, double>> out;
        for (const double x : v) {
            if (!out.empty() && out.back().first == x) {
                out.back().second += 1.0;
            } else {
                out.emplace_back(x, 1.0);
            }
        }
        return out;
    };
    const auto d0 = distinct(gs.theta0);
    const auto d1 = distinct(gs.theta1);

    std::vector<std::pair<double, double>> acc;
    acc.reserve(d0.size() * d1.size());
    for (const auto& [v0, c0] : d0) {
        for (const auto& [v1, c1] : d1) {
            acc.emplace_back(0.5 * (v0 + v1), c0 * c1);
        }
    }
    std::sort(acc.begin(), acc.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    SupportSet s;
    for (const auto& [x, m] : acc) {
        if (!s.points.empty() && s.points.back() == x) {
            s.mult.back() += m;
        } else {
            s.points.push_back(x);
            s.mult.push_back(m);
        }
        s.total_mass += m;
    }
    return s;
}

// Weighted resampling reduction: draw target_size points with replacement
// from the unique support values, proportionally to their multiplicities.
// The result's multiplicities are the drawn counts and total_mass is
// target_size.
[[nodiscard]] inline SupportSet reduced_support(const GroupedScores& gs, std::size_t target_size,
                                                Rng& rng) {
    if (target_size == 0) throw std::invalid_argument("reduced_support: target_size must be > 0");
    const SupportSet full = common_support(gs);

    std::vector<double> cum(full.size());
    double running = 0.0;
    for (std::size_t i = 0; i < full.size(); ++i) {
        running += full.mult[i];
        cum[i] = running;
    }

    std::vector<double> counts(full.size(), 0.0);
    for (std::size_t t = 0; t < target_size; ++t) {
        counts[rng.discrete(cum)] += 1.0;
    }

    SupportSet s;
    s.reduced = true;
    s.total_mass = static_cast<double>(target_size);
    for (std::size_t i = 0; i < full.size(); ++i) {
        if (counts[i] > 0.0) {
            s.points.push_back(full.points[i]);
            s.mult.push_back(counts[i]);
        }
    }
    return s;
}

// Full support when it fits under the cap, otherwise the reduction.
[[nodiscard]] inline SupportSet build_support(const GroupedScores& gs, std::size_t cap, Rng& rng) {
    if (gs.n0() * gs.n1() <= cap) return common_support(gs);
    return reduced_support(gs, cap, rng);
}

}  // namespace kdif
