#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kdif/rng.hpp"
#include "kdif/statistic.hpp"

// Wild-bootstrap inference for the estimated-optimal-weight statistic. The
// null model is a single pooled curve fitted to both groups; bootstrap
// responses are drawn from it as independent Bernoullis while the matching
// scores, group labels, support and density estimates stay fixed. Each
// replicate re-estimates both curves and the weights, so the reference
// distribution reflects the full estimation pipeline.

namespace kdif {

struct BootstrapConfig {
    std::size_t B = 500;
    std::uint64_t seed = 0;
    SmoothingConfig pooled_smoothing{};  // governs the pooled null fit
};

// Pooled-sample curve fit (pooled ECDF, bandwidth from the pooled n),
// evaluated at each respondent's own score.
[[nodiscard]] inline std::vector<double> pooled_irc(std::size_t item, const ResponseMatrix& rm,
                                                    const std::vector<double>& scores,
                                                    SmoothingConfig cfg) {
    const auto y = rm.item_column(item);
    return irc_estimate(y, scores, scores, cfg);
}

namespace detail {

// Positions of each pooled respondent inside their group's response vector.
struct GroupSlots {
    std::vector<std::uint8_t> which;  // 0 or 1
    std::vector<std::size_t> slot;

    explicit GroupSlots(const GroupedScores& gs) {
        const std::size_t n = gs.n0() + gs.n1();
        which.resize(n);
        slot.resize(n);
        for (std::size_t k = 0; k < gs.idx0.size(); ++k) {
            which[gs.idx0[k]] = 0;
            slot[gs.idx0[k]] = k;
        }
        for (std::size_t k = 0; k < gs.idx1.size(); ++k) {
            which[gs.idx1[k]] = 1;
            slot[gs.idx1[k]] = k;
        }
    }
};

}  // namespace detail

// Bootstrap test for one item on a prebuilt context. yhat holds the pooled
// null fit at the respondents' scores; y0/y1 are the observed responses in
// group order. The p-value is the proportion of bootstrap statistics that
// exceed the observed one.
[[nodiscard]] inline DifResult wild_bootstrap_item(const AnalysisContext& ctx, std::size_t item,
                                                   const std::vector<double>& y0,
                                                   const std::vector<double>& y1,
                                                   const std::vector<double>& yhat,
                                                   const BootstrapConfig& bcfg) {
    if (bcfg.B == 0) throw std::invalid_argument("wild_bootstrap_item: B must be positive");
    const std::size_t S = ctx.support.size();
    const std::size_t n0 = ctx.gs.n0();
    const std::size_t n1 = ctx.gs.n1();
    const std::size_t n = n0 + n1;
    const double lambda = ctx.gs.lambda_hat;

    // Observed statistic with estimated weights.
    std::vector<double> m0, m1;
    curves_at_support(ctx, y0, y1, m0, m1);
    const EstimatedWeights ew = estimated_weights_from_curves(ctx, m0, m1);
    const double T = test_statistic(m0, m1, ew.w, ctx.support);

    // Conditional variance and z are reported as diagnostics alongside the
    // bootstrap p-value.
    std::vector<double> var0 = ctx.V0.apply(y0);
    std::vector<double> var1 = ctx.V1.apply(y1);
    for (double& m : var0) m = conditional_variance(m);
    for (double& m : var1) m = conditional_variance(m);
    const double sigma2 = detail::variance_from_profiles(
        var0, var1, averaging_profile(ctx.W0, ew.w, ctx.support),
        averaging_profile(ctx.W1, ew.w, ctx.support));

    DifResult res;
    res.item = item;
    res.method = "np_optimal_boot";
    res.T_hat = T;
    res.sigma2_hat = sigma2;
    res.weight_divergence = ew.diverged;
    res.support_mass = ctx.support.total_mass;
    if (sigma2 > 0.0) {
        const double N = static_cast<double>(n0) * static_cast<double>(n1) / static_cast<double>(n);
        res.z = std::sqrt(N) * T / std::sqrt(sigma2);
    }

    // A pooled fit collapsed to 0 or 1 everywhere cannot generate variation;
    // report the non-rejection and flag it.
    bool all0 = true, all1 = true;
    for (const double v : yhat) {
        all0 = all0 && (v == 0.0);
        all1 = all1 && (v == 1.0);
    }
    if (all0 || all1) {
        res.p_value = 1.0;
        res.degenerate = true;
        return res;
    }

    // Bernoulli draws from the pooled fit, one substream per (seed, item, b)
    // so the result is independent of any execution order. Draws follow
    // respondent order within each substream.
    const detail::GroupSlots slots(ctx.gs);
    const std::size_t B = bcfg.B;
    std::vector<double> Y0(n0 * B), Y1(n1 * B);
    for (std::size_t b = 0; b < B; ++b) {
        Rng rng = derive_stream(bcfg.seed, item, b, 0xB00757A9ULL);
        for (std::size_t p = 0; p < n; ++p) {
            const double bit = rng.bernoulli(yhat[p]) ? 1.0 : 0.0;
            if (slots.which[p] == 0) {
                Y0[slots.slot[p] * B + b] = bit;
            } else {
                Y1[slots.slot[p] * B + b] = bit;
            }
        }
    }

    // Curve estimates for all replicates at once, then the statistic column
    // by column with the weights re-estimated from each replicate's curves.
    std::vector<double> M0(S * B), M1(S * B);
    ctx.W0.apply_columns(Y0.data(), B, M0.data());
    ctx.W1.apply_columns(Y1.data(), B, M1.data());

    std::vector<double> Tb(B, 0.0);
    for (std::size_t r = 0; r < S; ++r) {
        const double* m0r = M0.data() + r * B;
        const double* m1r = M1.data() + r * B;
        const double multr = ctx.support.mult[r];
        const double ef0r = ctx.ef0[r];
        const double ef1r = ctx.ef1[r];
        for (std::size_t b = 0; b < B; ++b) {
            const double d = m0r[b] - m1r[b];
            double den = (1.0 - lambda) * m0r[b] * (1.0 - m0r[b]) * ef0r +
                         lambda * m1r[b] * (1.0 - m1r[b]) * ef1r;
            den = std::max(den, weight_denominator_floor);
            Tb[b] += multr * d * d / den;
        }
    }
    std::size_t exceed = 0;
    const double mass = ctx.support.total_mass;
    for (std::size_t b = 0; b < B; ++b) {
        if (T < Tb[b] / mass) ++exceed;
    }
    res.p_value = static_cast<double>(exceed) / static_cast<double>(B);
    return res;
}

// Self-contained entry point: builds the context pieces, fits the pooled
// null and runs the bootstrap for one item.
[[nodiscard]] inline DifResult wild_bootstrap_pvalue(std::size_t item, const ResponseMatrix& rm,
                                                     const GroupedScores& gs, SmoothingConfig cfg,
                                                     const SupportSet& support,
                                                     const BootstrapConfig& bcfg) {
    const auto scores = standardized_total_score(rm);
    const auto ctx = AnalysisContext::build(gs, scores, support, cfg);
    std::vector<double> y0, y1;
    ctx.split_item(rm, item, y0, y1);
    const auto yhat = pooled_irc(item, rm, scores, bcfg.pooled_smoothing);
    return wild_bootstrap_item(ctx, item, y0, y1, yhat, bcfg);
}

}  // namespace kdif
