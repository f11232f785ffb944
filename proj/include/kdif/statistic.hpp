#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdif/data.hpp"
#include "kdif/kernel.hpp"
#include "kdif/math.hpp"
#include "kdif/support.hpp"

// The curve-comparison test statistic: weighting schemes (fixed, optimal,
// estimated optimal), the statistic itself, its conditional variance
// estimator, and the normal approximation used for inference.

namespace kdif {

inline constexpr double weight_denominator_floor = 1e-12;
inline constexpr double weight_divergence_threshold = 1e6;

// Per-item outcome of one detection method.
struct DifResult {
    std::size_t item = 0;
    std::string method;
    double T_hat = 0.0;
    double sigma2_hat = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    bool weight_divergence = false;
    bool degenerate = false;
    double support_mass = 0.0;
};

// Everything about a dataset that does not depend on the item: grouped
// scores, the evaluation support, per-group weight matrices at the support
// and at the respondents' own scores, and density estimates at the support
// points. Building this once and reusing it across items (and bootstrap
// replicates) is what makes the harness affordable.
struct AnalysisContext {
    SmoothingConfig cfg;
    GroupedScores gs;
    SupportSet support;
    std::vector<double> scores;  // pooled, respondent order
    WeightMatrix W0, W1;         // support x n_g
    WeightMatrix V0, V1;         // n_g x n_g, rows at the group's own scores
    WeightMatrix Vpool;          // n x n pooled smoother (only if requested)
    std::vector<double> ef0, ef1;  // e_hat/f_hat ratios at the support points

    [[nodiscard]] static AnalysisContext build(const GroupedScores& gs,
                                               const std::vector<double>& scores,
                                               const SupportSet& support, SmoothingConfig cfg,
                                               bool with_pooled = false) {
        AnalysisContext ctx;
        ctx.cfg = cfg;
        ctx.gs = gs;
        ctx.support = support;
        ctx.scores = scores;

        const RankSmoother s0(gs.theta0, cfg);
        const RankSmoother s1(gs.theta1, cfg);
        ctx.W0 = s0.matrix(support.points);
        ctx.W1 = s1.matrix(support.points);
        ctx.V0 = s0.matrix(gs.theta0);
        ctx.V1 = s1.matrix(gs.theta1);
        if (with_pooled) {
            const RankSmoother sp(scores, cfg);
            ctx.Vpool = sp.matrix(scores);
        }

        const KdeDensity f0 = kde_density(gs.theta0);
        const KdeDensity f1 = kde_density(gs.theta1);
        const KdeDensity eh =
            kde_density_weighted(support.points, support.mult, support.total_mass);
        ctx.ef0.resize(support.size());
        ctx.ef1.resize(support.size());
        for (std::size_t r = 0; r < support.size(); ++r) {
            const double e = eh(support.points[r]);
            ctx.ef0[r] = e / f0(support.points[r]);
            ctx.ef1[r] = e / f1(support.points[r]);
        }
        return ctx;
    }

    // Responses of one item split into group order (aligned with theta0/theta1).
    void split_item(const ResponseMatrix& rm, std::size_t item, std::vector<double>& y0,
                    std::vector<double>& y1) const {
        y0.resize(gs.n0());
        y1.resize(gs.n1());
        for (std::size_t k = 0; k < gs.idx0.size(); ++k) y0[k] = rm.at(gs.idx0[k], item);
        for (std::size_t k = 0; k < gs.idx1.size(); ++k) y1[k] = rm.at(gs.idx1[k], item);
    }
};

// ---------------------------------------------------------------------------
// Weighting schemes
// ---------------------------------------------------------------------------

// Non-informative weighting: W(x) = 1 at every support point.
[[nodiscard]] inline std::vector<double> fixed_weights(const SupportSet& support) {
    return std::vector<double>(support.size(), 1.0);
}

// Power-optimal weighting for a known curve difference: the difference
// divided by the mixture of local Bernoulli variances, each scaled by the
// density ratio e/f_g of averaged to group scores.
template <typename M0, typename M1, typename F0, typename F1, typename E>
[[nodiscard]] std::vector<double> optimal_weights(M0&& m0, M1&& m1, F0&& f0, F1&& f1, E&& e,
                                                  double lambda, const SupportSet& support) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw std::invalid_argument("optimal_weights: lambda must lie in (0,1)");
    }
    std::vector<double> w(support.size());
    for (std::size_t r = 0; r < support.size(); ++r) {
        const double x = support.points[r];
        const double v0 = conditional_variance(m0(x));
        const double v1 = conditional_variance(m1(x));
        const double ex = e(x);
        const double den = (1.0 - lambda) * v0 * ex / f0(x) + lambda * v1 * ex / f1(x);
        w[r] = (m0(x) - m1(x)) / std::max(den, weight_denominator_floor);
    }
    return w;
}

struct EstimatedWeights {
    std::vector<double> w;
    bool diverged = false;
};

// Plug-in version of the optimal weights built from the estimated curves and
// the KDE density ratios held by the context. The denominator is floored
// rather than allowed to vanish; magnitudes beyond the divergence threshold
// are flagged instead of being silently dropped.
[[nodiscard]] inline EstimatedWeights estimated_weights_from_curves(
    const AnalysisContext& ctx, const std::vector<double>& m0, const std::vector<double>& m1) {
    const double lambda = ctx.gs.lambda_hat;
    EstimatedWeights ew;
    ew.w.resize(ctx.support.size());
    for (std::size_t r = 0; r < ctx.support.size(); ++r) {
        const double den = (1.0 - lambda) * m0[r] * (1.0 - m0[r]) * ctx.ef0[r] +
                           lambda * m1[r] * (1.0 - m1[r]) * ctx.ef1[r];
        const double w = (m0[r] - m1[r]) / std::max(den, weight_denominator_floor);
        ew.w[r] = w;
        if (std::fabs(w) > weight_divergence_threshold) ew.diverged = true;
    }
    return ew;
}

[[nodiscard]] inline EstimatedWeights estimated_optimal_weights(std::size_t item,
                                                                const ResponseMatrix& rm,
                                                                const GroupedScores& gs,
                                                                SmoothingConfig cfg,
                                                                const SupportSet& support) {
    const auto scores = standardized_total_score(rm);
    const auto ctx = AnalysisContext::build(gs, scores, support, cfg);
    std::vector<double> y0, y1;
    ctx.split_item(rm, item, y0, y1);
    return estimated_weights_from_curves(ctx, ctx.W0.apply(y0), ctx.W1.apply(y1));
}

// ---------------------------------------------------------------------------
// Statistic and variance
// ---------------------------------------------------------------------------

// Multiplicity-weighted average of W(x) * (m0(x) - m1(x)) over the support,
// divided by the support's total mass.
[[nodiscard]] inline double test_statistic(const std::vector<double>& m0_hat,
                                           const std::vector<double>& m1_hat,
                                           const std::vector<double>& weights,
                                           const SupportSet& support) {
    if (m0_hat.size() != support.size() || m1_hat.size() != support.size() ||
        weights.size() != support.size()) {
        throw std::invalid_argument("test_statistic: vectors not aligned with support");
    }
    double acc = 0.0;
    for (std::size_t r = 0; r < support.size(); ++r) {
        acc += support.mult[r] * weights[r] * (m0_hat[r] - m1_hat[r]);
    }
    return acc / support.total_mass;
}

// Per-respondent averaging profile: A_p = (1/mass) * sum_x mult(x) W(x) W_p(x).
// The statistic is linear in the responses with coefficients +-A_p, which is
// what the variance estimator sums over.
[[nodiscard]] inline std::vector<double> averaging_profile(const WeightMatrix& Wg,
                                                           const std::vector<double>& weights,
                                                           const SupportSet& support) {
    std::vector<double> a(Wg.cols, 0.0);
    for (std::size_t r = 0; r < Wg.rows; ++r) {
        const double f = support.mult[r] * weights[r];
        if (f == 0.0) continue;
        const double* row = Wg.w.data() + r * Wg.cols;
        for (std::size_t p = 0; p < Wg.cols; ++p) a[p] += f * row[p];
    }
    const double inv = 1.0 / support.total_mass;
    for (double& v : a) v *= inv;
    return a;
}

namespace detail {

// sigma2 = N * sum_p var_p A_p^2 with N = n0 n1/(n0+n1). var_p is either the
// estimated Bernoulli variance at the respondent's score or the squared
// residual, depending on the caller.
[[nodiscard]] inline double variance_from_profiles(const std::vector<double>& var0,
                                                   const std::vector<double>& var1,
                                                   const std::vector<double>& a0,
                                                   const std::vector<double>& a1) {
    double acc = 0.0;
    for (std::size_t p = 0; p < var0.size(); ++p) acc += var0[p] * a0[p] * a0[p];
    for (std::size_t p = 0; p < var1.size(); ++p) acc += var1[p] * a1[p] * a1[p];
    const double n0 = static_cast<double>(var0.size());
    const double n1 = static_cast<double>(var1.size());
    return acc * (n0 * n1 / (n0 + n1));
}

}  // namespace detail

// Conditional variance of the statistic given the scores, using estimated
// Bernoulli variances m_hat(1-m_hat) evaluated at each respondent's own
// score. Always non-negative; exactly zero when every curve estimate is
// degenerate (constant responses).
[[nodiscard]] inline double variance_estimate(std::size_t item, const ResponseMatrix& rm,
                                              const GroupedScores& gs, SmoothingConfig cfg,
                                              const SupportSet& support,
                                              const std::vector<double>& weights) {
    const RankSmoother s0(gs.theta0, cfg);
    const RankSmoother s1(gs.theta1, cfg);
    const WeightMatrix W0 = s0.matrix(support.points);
    const WeightMatrix W1 = s1.matrix(support.points);
    std::vector<double> y0(gs.n0()), y1(gs.n1());
    for (std::size_t k = 0; k < gs.idx0.size(); ++k) y0[k] = rm.at(gs.idx0[k], item);
    for (std::size_t k = 0; k < gs.idx1.size(); ++k) y1[k] = rm.at(gs.idx1[k], item);

    std::vector<double> var0 = s0.matrix(gs.theta0).apply(y0);
    std::vector<double> var1 = s1.matrix(gs.theta1).apply(y1);
    for (double& m : var0) m = conditional_variance(m);
    for (double& m : var1) m = conditional_variance(m);

    return detail::variance_from_profiles(var0, var1, averaging_profile(W0, weights, support),
                                          averaging_profile(W1, weights, support));
}

// Same shape with squared residuals (y_p - m_hat(theta_p))^2 in place of the
// estimated Bernoulli variances.
[[nodiscard]] inline double variance_estimate_residual(std::size_t item, const ResponseMatrix& rm,
                                                       const GroupedScores& gs,
                                                       SmoothingConfig cfg,
                                                       const SupportSet& support,
                                                       const std::vector<double>& weights) {
    const RankSmoother s0(gs.theta0, cfg);
    const RankSmoother s1(gs.theta1, cfg);
    const WeightMatrix W0 = s0.matrix(support.points);
    const WeightMatrix W1 = s1.matrix(support.points);
    std::vector<double> y0(gs.n0()), y1(gs.n1());
    for (std::size_t k = 0; k < gs.idx0.size(); ++k) y0[k] = rm.at(gs.idx0[k], item);
    for (std::size_t k = 0; k < gs.idx1.size(); ++k) y1[k] = rm.at(gs.idx1[k], item);

    std::vector<double> var0 = s0.matrix(gs.theta0).apply(y0);
    std::vector<double> var1 = s1.matrix(gs.theta1).apply(y1);
    for (std::size_t p = 0; p < var0.size(); ++p) var0[p] = (y0[p] - var0[p]) * (y0[p] - var0[p]);
    for (std::size_t p = 0; p < var1.size(); ++p) var1[p] = (y1[p] - var1[p]) * (y1[p] - var1[p]);

    return detail::variance_from_profiles(var0, var1, averaging_profile(W0, weights, support),
                                          averaging_profile(W1, weights, support));
}

struct NormalizedStat {
    double z = 0.0;
    double p = 1.0;
    bool degenerate = false;
};

// z = sqrt(N) T / sigma with N = n0 n1/(n0+n1); two-sided normal p-value.
// A zero variance is only legal when the statistic itself is zero (constant
// responses or identically-zero weights); that case is flagged, not rejected.
[[nodiscard]] inline NormalizedStat normalized_statistic(double T_hat, double sigma2_hat,
                                                         std::size_t n0, std::size_t n1) {
    if (sigma2_hat < 0.0) throw std::domain_error("normalized_statistic: negative variance");
    if (sigma2_hat == 0.0) {
        if (T_hat == 0.0) return {0.0, 1.0, true};
        throw std::domain_error("normalized_statistic: zero variance with nonzero statistic");
    }
    const double N =
        static_cast<double>(n0) * static_cast<double>(n1) / static_cast<double>(n0 + n1);
    const double z = std::sqrt(N) * T_hat / std::sqrt(sigma2_hat);
    return {z, 2.0 * (1.0 - normal_cdf(std::fabs(z))), false};
}

// ---------------------------------------------------------------------------
// Fast per-item paths used by the harness, bootstrap and CLI
// ---------------------------------------------------------------------------

// Curve estimates for one item at the support points.
inline void curves_at_support(const AnalysisContext& ctx, const std::vector<double>& y0,
                              const std::vector<double>& y1, std::vector<double>& m0,
                              std::vector<double>& m1) {
    m0 = ctx.W0.apply(y0);
    m1 = ctx.W1.apply(y1);
}

// Normal-approximation test for one item with an externally supplied weight
// vector (fixed, true-optimal, or estimated).
[[nodiscard]] inline DifResult z_test_item(const AnalysisContext& ctx, std::size_t item,
                                           const std::vector<double>& y0,
                                           const std::vector<double>& y1,
                                           const std::vector<double>& weights,
                                           const std::string& method_name,
                                           bool weight_divergence = false) {
    std::vector<double> m0, m1;
    curves_at_support(ctx, y0, y1, m0, m1);
    const double T = test_statistic(m0, m1, weights, ctx.support);

    std::vector<double> var0 = ctx.V0.apply(y0);
    std::vector<double> var1 = ctx.V1.apply(y1);
    for (double& m : var0) m = conditional_variance(m);
    for (double& m : var1) m = conditional_variance(m);
    const double sigma2 = detail::variance_from_profiles(
        var0, var1, averaging_profile(ctx.W0, weights, ctx.support),
        averaging_profile(ctx.W1, weights, ctx.support));

    const NormalizedStat ns = normalized_statistic(T, sigma2, ctx.gs.n0(), ctx.gs.n1());
    DifResult res;
    res.item = item;
    res.method = method_name;
    res.T_hat = T;
    res.sigma2_hat = sigma2;
    res.z = ns.z;
    res.p_value = ns.p;
    res.weight_divergence = weight_divergence;
    res.degenerate = ns.degenerate;
    res.support_mass = ctx.support.total_mass;
    return res;
}

// ---------------------------------------------------------------------------
// Asymptotic power of the normal test under a local alternative
// ---------------------------------------------------------------------------

// power = 1 - Phi(mu/sigma + q) + Phi(mu/sigma - q) with
// mu = -integral of W s dE and sigma^2 the weighted mixture of local
// variances; integrals by trapezoid rule on a 512-point grid over [-6,6]
// against the averaged-score density e.
template <typename WFn, typename SFn, typename M0, typename M1, typename F0, typename F1,
          typename E>
[[nodiscard]] double asymptotic_power(WFn&& W, SFn&& s, M0&& m0, M1&& m1, F0&& f0, F1&& f1, E&& e,
                                      double lambda, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("asymptotic_power: alpha must lie in (0,1)");
    }
    const auto grid = linspace(-6.0, 6.0, 512);
    std::vector<double> mu_y(grid.size()), var_y(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        const double wx = W(x);
        const double ex = e(x);
        mu_y[i] = wx * s(x) * ex;
        const double v0 = conditional_variance(m0(x));
        const double v1 = conditional_variance(m1(x));
        var_y[i] = wx * wx * ((1.0 - lambda) * v0 / f0(x) + lambda * v1 / f1(x)) * ex * ex;
    }
    const double mu = -trapezoid(grid, mu_y);
    const double sigma2 = trapezoid(grid, var_y);
    if (sigma2 <= 0.0) throw std::domain_error("asymptotic_power: degenerate variance");
    const double shift = mu / std::sqrt(sigma2);
    const double q = normal_quantile(1.0 - alpha / 2.0);
    return 1.0 - normal_cdf(shift + q) + normal_cdf(shift - q);
}

}  // namespace kdif
