#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdif/data.hpp"
#include "kdif/math.hpp"
#include "kdif/rng.hpp"

// Response generation for the Monte Carlo study: a five-shape-parameter
// logistic item model, the standard catalogue of DIF parameterizations, and
// the weighted unsigned area diagnostic that calibrates DIF magnitude.

namespace kdif {

// Four asymptote/location parameters plus three higher-order shape
// coefficients; c <= d after clamping.
struct ItemParams {
    double a = 1.0;  // discrimination
    double b = 0.0;  // difficulty
    double c = 0.0;  // lower asymptote (pseudo-guessing)
    double d = 1.0;  // upper asymptote (inattention)
    double e = 0.0;
    double f = 0.0;
    double g = 0.0;

    friend bool operator==(const ItemParams&, const ItemParams&) = default;
};

// P(theta) = c + (d-c) * expit(a * (theta - b - e theta^2 - f theta^3 - g theta^5)).
// Bounded by [min(c,d), max(c,d)]; monotone in theta when e=f=g=0 and a>0.
[[nodiscard]] inline double irc_true(const ItemParams& p, double theta) noexcept {
    const double t2 = theta * theta;
    const double shape = theta - p.b - p.e * t2 - p.f * t2 * theta - p.g * t2 * t2 * theta;
    return p.c + (p.d - p.c) * expit(p.a * shape);
}

enum class DifSource { a, b, c, d, mix1, mix2, none };

[[nodiscard]] inline std::string dif_source_name(DifSource s) {
    switch (s) {
        case DifSource::a: return "a";
        case DifSource::b: return "b";
        case DifSource::c: return "c";
        case DifSource::d: return "d";
        case DifSource::mix1: return "mix1";
        case DifSource::mix2: return "mix2";
        case DifSource::none: return "none";
    }
    throw std::invalid_argument("dif_source_name: unknown tag");
}

[[nodiscard]] inline DifSource parse_dif_source(const std::string& s) {
    if (s == "a") return DifSource::a;
    if (s == "b") return DifSource::b;
    if (s == "c") return DifSource::c;
    if (s == "d") return DifSource::d;
    if (s == "mix1") return DifSource::mix1;
    if (s == "mix2") return DifSource::mix2;
    if (s == "none") return DifSource::none;
    throw std::invalid_argument("unknown scenario tag: " + s);
}

struct Scenario {
    DifSource dif_source = DifSource::none;
    ItemParams reference_params{};
    ItemParams focal_params{};
    std::size_t n_items = 20;
    std::size_t n = 0;  // total respondents, equal groups
};

// The studied-item parameter pairs for each DIF source. Single-parameter
// sources perturb exactly one of a/b/c/d; the mix sources describe curves
// with several inflection points that cross between groups.
[[nodiscard]] inline Scenario dif_scenario(DifSource source) {
    Scenario sc;
    sc.dif_source = source;
    switch (source) {
        case DifSource::a:
            sc.reference_params = {0.42, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
            sc.focal_params = {2.00, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
            break;
        case DifSource::b:
            sc.reference_params = {1.0, 0.00, 0.0, 1.0, 0.0, 0.0, 0.0};
            sc.focal_params = {1.0, 1.00, 0.0, 1.0, 0.0, 0.0, 0.0};
            break;
        case DifSource::c:
            sc.reference_params = {1.0, 0.0, 0.00, 1.0, 0.0, 0.0, 0.0};
            sc.focal_params = {1.0, 0.0, 0.39, 1.0, 0.0, 0.0, 0.0};
            break;
        case DifSource::d:
            sc.reference_params = {1.0, 0.0, 0.0, 1.00, 0.0, 0.0, 0.0};
            sc.focal_params = {1.0, 0.0, 0.0, 0.61, 0.0, 0.0, 0.0};
            break;
        case DifSource::mix1:
            sc.reference_params = {1.90, 0.28, 0.07, 1.00, 1.00, -0.70, 0.00};
            sc.focal_params = {0.35, -1.75, 0.03, 0.98, 1.60, -0.90, 0.00};
            break;
        case DifSource::mix2:
            sc.reference_params = {4.20, 0.00, 0.10, 0.85, 0.00, -0.50, -0.50};
            sc.focal_params = {0.18, -1.50, 0.00, 1.00, 1.00, -1.20, -0.50};
            break;
        case DifSource::none:
            break;
    }
    return sc;
}

// Background (non-DIF) item: a ~ N(1.1, 0.3), b ~ N(0, 1.1), c ~ N(0.2, 0.05),
// d ~ N(0.8, 0.05), shape coefficients zero. Asymptote draws are clamped to
// [0,1] and reordered so c <= d; clamp_count tallies affected draws.
[[nodiscard]] inline ItemParams draw_non_dif_params(Rng& rng, std::size_t* clamp_count = nullptr) {
    ItemParams p;
    p.a = rng.normal(1.1, 0.3);
    p.b = rng.normal(0.0, 1.1);
    p.c = rng.normal(0.2, 0.05);
    p.d = rng.normal(0.8, 0.05);
    const double c_raw = p.c, d_raw = p.d;
    p.c = std::clamp(p.c, 0.0, 1.0);
    p.d = std::clamp(p.d, 0.0, 1.0);
    if (p.c > p.d) std::swap(p.c, p.d);
    if (clamp_count != nullptr && (p.c != c_raw || p.d != d_raw)) ++*clamp_count;
    return p;
}

struct SimulatedData {
    ResponseMatrix rm;
    std::vector<double> theta;
    std::vector<ItemParams> params_ref;  // per item
    std::vector<ItemParams> params_foc;
    std::size_t dif_item = 0;
    std::size_t clamped_draws = 0;
};

// One replicate: abilities theta_p ~ N(0,1), equal-sized groups (reference
// rows first), responses Bernoulli(irc_true). The studied item sits at index
// 0 and uses the scenario's parameter pair; all other items share a fresh
// background draw between groups. Draw order (item parameters, then
// abilities, then responses row by row) is fixed, so one seed gives one
// matrix.
[[nodiscard]] inline SimulatedData generate_responses(const Scenario& sc, Rng& rng) {
    if (sc.n < 4 || sc.n % 2 != 0) {
        throw std::invalid_argument("generate_responses: n must be even and at least 4");
    }
    if (sc.n_items == 0) throw std::invalid_argument("generate_responses: need at least 1 item");

    SimulatedData out;
    out.params_ref.resize(sc.n_items);
    out.params_foc.resize(sc.n_items);
    for (std::size_t i = 0; i < sc.n_items; ++i) {
        if (i == out.dif_item && sc.dif_source != DifSource::none) {
            out.params_ref[i] = sc.reference_params;
            out.params_foc[i] = sc.focal_params;
        } else {
            const ItemParams shared = draw_non_dif_params(rng, &out.clamped_draws);
            out.params_ref[i] = shared;
            out.params_foc[i] = shared;
        }
    }

    out.theta.resize(sc.n);
    for (double& t : out.theta) t = rng.normal();

    ResponseMatrix& rm = out.rm;
    rm.n = sc.n;
    rm.items = sc.n_items;
    rm.reference_label = "ref";
    rm.focal_label = "foc";
    rm.item_names.resize(sc.n_items);
    for (std::size_t i = 0; i < sc.n_items; ++i) {
        rm.item_names[i] = "item" + std::to_string(i + 1);
    }
    rm.group.resize(sc.n);
    rm.y.resize(sc.n * sc.n_items);
    const std::size_t half = sc.n / 2;
    for (std::size_t p = 0; p < sc.n; ++p) {
        const bool focal = p >= half;
        rm.group[p] = focal ? 1 : 0;
        for (std::size_t i = 0; i < sc.n_items; ++i) {
            const ItemParams& ip = focal ? out.params_foc[i] : out.params_ref[i];
            rm.y[p * sc.n_items + i] = rng.bernoulli(irc_true(ip, out.theta[p])) ? 1 : 0;
        }
    }
    return out;
}

// Integral of |m_ref - m_foc| against a trait density, trapezoid rule on
// [-6,6] with 1201 points. Used to check that every shipped DIF pair carries
// about the same unsigned area (~0.196) under the standard normal density.
template <typename DensityFn>
[[nodiscard]] double weighted_unsigned_area(const ItemParams& p_ref, const ItemParams& p_foc,
                                            DensityFn&& density) {
    const auto grid = linspace(-6.0, 6.0, 1201);
    std::vector<double> y(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        y[i] = std::fabs(irc_true(p_ref, grid[i]) - irc_true(p_foc, grid[i])) * density(grid[i]);
    }
    return trapezoid(grid, y);
}

[[nodiscard]] inline double weighted_unsigned_area(const ItemParams& p_ref,
                                                   const ItemParams& p_foc) {
    return weighted_unsigned_area(p_ref, p_foc, [](double x) { return normal_pdf(x); });
}

}  // namespace kdif
