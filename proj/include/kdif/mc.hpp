#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdif/bootstrap.hpp"
#include "kdif/logistic.hpp"
#include "kdif/method.hpp"
#include "kdif/parallel.hpp"
#include "kdif/simulation.hpp"
#include "kdif/statistic.hpp"
#include "kdif/support.hpp"

#include <json.hpp>

// Monte Carlo harness: runs (scenario x n x zeta x method) cells, tallies
// power (studied item) and rejection rate (background items), tracks the
// weight-estimation RMSE against the known optimal weights, and emits
// deterministic report artifacts.

namespace kdif {

struct ExperimentGrid {
    std::vector<DifSource> scenarios;
    std::vector<std::size_t> sample_sizes{50, 100, 200, 300, 400};
    std::vector<double> zetas{0.260, 7.0 / 24.0, 0.320};
    std::vector<Method> methods{Method::np_fixed, Method::np_optimal_boot, Method::logistic};
    std::size_t replications = 100;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    std::size_t bootstrap_B = 500;
    std::size_t support_cap = 2000;
    KernelKind kernel = KernelKind::epanechnikov;
    std::size_t n_items = 20;
    std::size_t jobs = 1;
    // Alternative RMSE evaluation grid (101 equispaced points on [-3,3])
    // instead of the replicate's support points.
    bool rmse_on_fixed_grid = false;
};

struct ConditionMetrics {
    double power = 0.0;
    double power_se = 0.0;
    double rejection_rate = 0.0;
    double rejection_se = 0.0;
    std::optional<double> rmse_weights;
    std::size_t replicate_count = 0;
    std::size_t diverged_count = 0;
};

struct ReportRow {
    DifSource scenario{};
    std::size_t n = 0;
    double zeta = 0.0;
    Method method{};
    ConditionMetrics metrics;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
};

// Mean estimated weight curve with a pointwise Monte Carlo band, on a fixed
// grid shared by all replicates of a condition.
struct WeightCurveRow {
    DifSource scenario{};
    std::size_t n = 0;
    double zeta = 0.0;
    Method method{};
    double x = 0.0;
    double w_mean = 0.0;
    double w_lo = 0.0;
    double w_hi = 0.0;
    std::size_t replications = 0;
};

namespace detail {

inline constexpr std::size_t curve_grid_size = 101;

[[nodiscard]] inline std::vector<double> curve_grid() { return linspace(-3.0, 3.0, curve_grid_size); }

// Density of the average of two independent standard normal scores.
[[nodiscard]] inline double averaged_normal_pdf(double x) noexcept {
    constexpr double inv_sqrt_pi = 0.56418958354775628695;
    return inv_sqrt_pi * std::exp(-x * x);
}

[[nodiscard]] inline bool uses_estimated_weights(Method m) noexcept {
    return m == Method::np_optimal_boot || m == Method::np_optimal_asymptotic;
}

// Per-replicate, per-method tallies; reduced sequentially in replicate order
// so the metrics are identical for any worker count.
struct RepTally {
    std::uint8_t dif_reject = 0;
    std::uint8_t diverged = 0;
    std::uint16_t null_rejects = 0;
    std::uint16_t null_count = 0;
    double rmse = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> weight_curve;  // empty unless tracked
};

// True optimal weights of the studied item evaluated at arbitrary points,
// with the trait densities known by construction: group scores are standard
// normal and their pairwise averages are N(0, 1/2).
[[nodiscard]] inline std::vector<double> true_weights_at(const Scenario& sc,
                                                         std::span<const double> points,
                                                         double lambda) {
    std::vector<double> w(points.size());
    for (std::size_t r = 0; r < points.size(); ++r) {
        const double x = points[r];
        const double m0 = irc_true(sc.reference_params, x);
        const double m1 = irc_true(sc.focal_params, x);
        const double ef = averaged_normal_pdf(x) / normal_pdf(x);
        const double den = (1.0 - lambda) * m0 * (1.0 - m0) * ef + lambda * m1 * (1.0 - m1) * ef;
        w[r] = (m0 - m1) / std::max(den, weight_denominator_floor);
    }
    return w;
}

// Estimated optimal weights of one item away from the support (used for the
// weight-curve artifact and the fixed-grid RMSE variant).
[[nodiscard]] inline std::vector<double> estimated_weights_at_grid(
    const AnalysisContext& ctx, const std::vector<double>& m0g, const std::vector<double>& m1g,
    const std::vector<double>& ef0g, const std::vector<double>& ef1g) {
    std::vector<double> w(m0g.size());
    const double lambda = ctx.gs.lambda_hat;
    for (std::size_t r = 0; r < m0g.size(); ++r) {
        const double den = (1.0 - lambda) * m0g[r] * (1.0 - m0g[r]) * ef0g[r] +
                           lambda * m1g[r] * (1.0 - m1g[r]) * ef1g[r];
        w[r] = (m0g[r] - m1g[r]) / std::max(den, weight_denominator_floor);
    }
    return w;
}

// Root of the multiplicity-weighted mean of (w_hat - w_true)^2 over the
// evaluation points.
[[nodiscard]] inline double weight_rmse(const std::vector<double>& w_hat,
                                        const std::vector<double>& w_true,
                                        const std::vector<double>& mult, double mass) {
    double acc = 0.0;
    for (std::size_t r = 0; r < w_hat.size(); ++r) {
        const double d = w_hat[r] - w_true[r];
        acc += mult[r] * d * d;
    }
    return std::sqrt(acc / mass);
}

}  // namespace detail

struct CellResult {
    std::vector<ReportRow> rows;             // one per method
    std::vector<WeightCurveRow> curve_rows;  // estimated-weight methods only
};

// One (scenario, n, zeta) cell: all requested methods are evaluated on the
// same simulated replicates, so method contrasts are paired. Replicates run
// in parallel; every random stream is derived from the grid seed and the
// cell coordinates alone.
[[nodiscard]] inline CellResult run_cell(const ExperimentGrid& grid, DifSource source,
                                         std::size_t n, double zeta) {
    Scenario sc = dif_scenario(source);
    sc.n = n;
    sc.n_items = grid.n_items;
    const SmoothingConfig cfg{grid.kernel, zeta};
    const std::size_t reps = grid.replications;
    const std::size_t n_methods = grid.methods.size();

    bool any_boot = false, any_est = false, any_true = false;
    for (const Method m : grid.methods) {
        any_boot = any_boot || (m == Method::np_optimal_boot);
        any_est = any_est || detail::uses_estimated_weights(m);
        any_true = any_true || (m == Method::np_optimal_true) || detail::uses_estimated_weights(m);
    }
    const bool track_curves = any_est && source != DifSource::none;
    const auto grid_points = detail::curve_grid();

    // Cell coordinates folded into the stream addresses.
    const std::uint64_t ka = mix64((static_cast<std::uint64_t>(source) << 32) ^ n);
    const std::uint64_t kb = std::bit_cast<std::uint64_t>(zeta);

    std::vector<std::vector<detail::RepTally>> tallies(n_methods);
    for (auto& t : tallies) t.resize(reps);

    parallel_for(reps, grid.jobs, [&](std::size_t rep) {
        Rng rng_data = derive_stream(grid.seed, ka, kb, 2 * rep);
        Rng rng_supp = derive_stream(grid.seed, ka, kb, 2 * rep + 1);
        const SimulatedData data = generate_responses(sc, rng_data);
        const auto scores = standardized_total_score(data.rm);
        const GroupedScores gs = split_groups(data.rm, scores);
        const SupportSet support = build_support(gs, grid.support_cap, rng_supp);
        const AnalysisContext ctx = AnalysisContext::build(gs, scores, support, cfg, any_boot);

        BootstrapConfig bcfg;
        bcfg.B = grid.bootstrap_B;
        bcfg.seed = mix64(grid.seed ^ mix64(ka) ^ mix64(kb) ^ (0xC0FFEEULL + rep));
        bcfg.pooled_smoothing = cfg;

        // Weight vectors shared by every method that needs them.
        std::vector<double> w_true_support, w_true_grid;
        if (any_true && source != DifSource::none) {
            w_true_support = detail::true_weights_at(sc, support.points, gs.lambda_hat);
            w_true_grid = detail::true_weights_at(sc, grid_points, gs.lambda_hat);
        }
        const std::vector<double> ones = fixed_weights(support);
        const std::vector<double> zeros(support.size(), 0.0);

        // Grid-evaluation machinery, built once per replicate when needed.
        std::vector<double> ef0g, ef1g;
        WeightMatrix W0g, W1g;
        if (track_curves || grid.rmse_on_fixed_grid) {
            const RankSmoother s0(gs.theta0, cfg);
            const RankSmoother s1(gs.theta1, cfg);
            W0g = s0.matrix(grid_points);
            W1g = s1.matrix(grid_points);
            const KdeDensity f0 = kde_density(gs.theta0);
            const KdeDensity f1 = kde_density(gs.theta1);
            const KdeDensity eh =
                kde_density_weighted(support.points, support.mult, support.total_mass);
            ef0g.resize(grid_points.size());
            ef1g.resize(grid_points.size());
            for (std::size_t r = 0; r < grid_points.size(); ++r) {
                const double e = eh(grid_points[r]);
                ef0g[r] = e / f0(grid_points[r]);
                ef1g[r] = e / f1(grid_points[r]);
            }
        }

        std::vector<double> y0, y1, y_pooled, yhat;
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
            const Method method = grid.methods[mi];
            detail::RepTally& tally = tallies[mi][rep];

            for (std::size_t item = 0; item < sc.n_items; ++item) {
                double p_value = 1.0;
                bool diverged = false;

                if (method == Method::logistic) {
                    y_pooled = data.rm.item_column(item);
                    const LrtResult lrt = lrt_dif(scores, data.rm.group, y_pooled);
                    p_value = lrt.p;
                } else {
                    ctx.split_item(data.rm, item, y0, y1);
                    switch (method) {
                        case Method::np_fixed: {
                            const DifResult r = z_test_item(ctx, item, y0, y1, ones, "np_fixed");
                            p_value = r.p_value;
                            break;
                        }
                        case Method::np_optimal_true: {
                            // Background items share parameters between
                            // groups, so their true weights vanish and the
                            // test never fires on them.
                            const std::vector<double>& w =
                                (item == data.dif_item && source != DifSource::none)
                                    ? w_true_support
                                    : zeros;
                            const DifResult r = z_test_item(ctx, item, y0, y1, w, "np_optimal_true");
                            p_value = r.p_value;
                            break;
                        }
                        case Method::np_optimal_asymptotic: {
                            std::vector<double> m0, m1;
                            curves_at_support(ctx, y0, y1, m0, m1);
                            const EstimatedWeights ew = estimated_weights_from_curves(ctx, m0, m1);
                            const DifResult r = z_test_item(ctx, item, y0, y1, ew.w,
                                                            "np_optimal_asymptotic", ew.diverged);
                            p_value = r.p_value;
                            diverged = ew.diverged;
                            break;
                        }
                        case Method::np_optimal_boot: {
                            y_pooled = data.rm.item_column(item);
                            yhat = ctx.Vpool.apply(y_pooled);
                            const DifResult r = wild_bootstrap_item(ctx, item, y0, y1, yhat, bcfg);
                            p_value = r.p_value;
                            diverged = r.weight_divergence;
                            break;
                        }
                        default: break;
                    }
                }

                const bool reject = p_value < grid.alpha;
                if (item == data.dif_item && source != DifSource::none) {
                    tally.dif_reject = reject ? 1 : 0;
                } else {
                    ++tally.null_count;
                    tally.null_rejects += reject ? 1 : 0;
                }
                tally.diverged |= diverged ? 1 : 0;

                // Weight diagnostics for the studied item.
                if (item == data.dif_item && source != DifSource::none &&
                    detail::uses_estimated_weights(method)) {
                    ctx.split_item(data.rm, item, y0, y1);
                    std::vector<double> m0, m1;
                    curves_at_support(ctx, y0, y1, m0, m1);
                    const EstimatedWeights ew = estimated_weights_from_curves(ctx, m0, m1);
                    if (grid.rmse_on_fixed_grid) {
                        const std::vector<double> w_grid = detail::estimated_weights_at_grid(
                            ctx, W0g.apply(y0), W1g.apply(y1), ef0g, ef1g);
                        const std::vector<double> unit(grid_points.size(), 1.0);
                        tally.rmse = detail::weight_rmse(w_grid, w_true_grid, unit,
                                                         static_cast<double>(grid_points.size()));
                    } else {
                        tally.rmse =
                            detail::weight_rmse(ew.w, w_true_support, support.mult,
                                                support.total_mass);
                    }
                    if (track_curves) {
                        tally.weight_curve = detail::estimated_weights_at_grid(
                            ctx, W0g.apply(y0), W1g.apply(y1), ef0g, ef1g);
                    }
                }
            }
        }
    });

    // Sequential reduction in replicate order.
    CellResult out;
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
        const Method method = grid.methods[mi];
        ConditionMetrics cm;
        std::size_t dif_rejects = 0, dif_total = 0, null_rejects = 0, null_total = 0;
        double rmse_sum = 0.0;
        std::size_t rmse_count = 0;
        std::vector<double> curve_sum, curve_sumsq;
        std::size_t curve_count = 0;

        for (std::size_t rep = 0; rep < reps; ++rep) {
            const detail::RepTally& tally = tallies[mi][rep];
            if (tally.diverged != 0) {
                ++cm.diverged_count;
                continue;
            }
            ++cm.replicate_count;
            if (source != DifSource::none) {
                dif_rejects += tally.dif_reject;
                ++dif_total;
            }
            null_rejects += tally.null_rejects;
            null_total += tally.null_count;
            if (!std::isnan(tally.rmse)) {
                rmse_sum += tally.rmse;
                ++rmse_count;
            }
            if (!tally.weight_curve.empty()) {
                if (curve_sum.empty()) {
                    curve_sum.assign(tally.weight_curve.size(), 0.0);
                    curve_sumsq.assign(tally.weight_curve.size(), 0.0);
                }
                for (std::size_t i = 0; i < tally.weight_curve.size(); ++i) {
                    curve_sum[i] += tally.weight_curve[i];
                    curve_sumsq[i] += tally.weight_curve[i] * tally.weight_curve[i];
                }
                ++curve_count;
            }
        }

        if (dif_total > 0) {
            cm.power = static_cast<double>(dif_rejects) / static_cast<double>(dif_total);
            cm.power_se = std::sqrt(cm.power * (1.0 - cm.power) / static_cast<double>(dif_total));
        }
        if (null_total > 0) {
            cm.rejection_rate =
                static_cast<double>(null_rejects) / static_cast<double>(null_total);
            cm.rejection_se = std::sqrt(cm.rejection_rate * (1.0 - cm.rejection_rate) /
                                        static_cast<double>(null_total));
        }
        if (rmse_count > 0) cm.rmse_weights = rmse_sum / static_cast<double>(rmse_count);

        out.rows.push_back({source, n, zeta, method, cm, reps, grid.seed});

        if (curve_count > 1) {
            const auto denom = static_cast<double>(curve_count);
            for (std::size_t i = 0; i < curve_sum.size(); ++i) {
                const double mean = curve_sum[i] / denom;
                const double var = std::max(0.0, curve_sumsq[i] / denom - mean * mean);
                const double half = 1.96 * std::sqrt(var / denom);
                out.curve_rows.push_back({source, n, zeta, method, grid_points[i], mean,
                                          mean - half, mean + half, curve_count});
            }
        }
    }
    return out;
}

// Full grid; one row per (scenario, n, zeta, method).
[[nodiscard]] inline CellResult run_grid(const ExperimentGrid& grid) {
    if (grid.replications == 0) throw std::invalid_argument("run_grid: replications must be > 0");
    if (!(grid.alpha > 0.0 && grid.alpha < 1.0)) {
        throw std::invalid_argument("run_grid: alpha must lie in (0,1)");
    }
    if (grid.methods.empty()) throw std::invalid_argument("run_grid: no methods selected");
    CellResult all;
    for (const DifSource source : grid.scenarios) {
        for (const std::size_t n : grid.sample_sizes) {
            for (const double zeta : grid.zetas) {
                CellResult cell = run_cell(grid, source, n, zeta);
                all.rows.insert(all.rows.end(), cell.rows.begin(), cell.rows.end());
                all.curve_rows.insert(all.curve_rows.end(), cell.curve_rows.begin(),
                                      cell.curve_rows.end());
            }
        }
    }
    return all;
}

namespace detail {

[[nodiscard]] inline std::string fmt(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

}  // namespace detail

// Deterministic CSV: same rows and bytes for a given seed, any job count.
inline void emit_report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open report file: " + path);
    out << "scenario,n,zeta,method,power,power_se,rejection_rate,rejection_se,"
           "rmse_weights,diverged,replications,seed\n";
    for (const auto& r : rows) {
        out << dif_source_name(r.scenario) << ',' << r.n << ',' << detail::fmt(r.zeta) << ','
            << method_name(r.method) << ',' << detail::fmt(r.metrics.power) << ','
            << detail::fmt(r.metrics.power_se) << ',' << detail::fmt(r.metrics.rejection_rate)
            << ',' << detail::fmt(r.metrics.rejection_se) << ','
            << (r.metrics.rmse_weights ? detail::fmt(*r.metrics.rmse_weights) : std::string{})
            << ',' << r.metrics.diverged_count << ',' << r.replications << ',' << r.seed << '\n';
    }
}

inline void emit_report_json(const std::vector<ReportRow>& rows, const std::string& path) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["scenario"] = dif_source_name(r.scenario);
        row["n"] = r.n;
        row["zeta"] = r.zeta;
        row["method"] = method_name(r.method);
        row["power"] = r.metrics.power;
        row["power_se"] = r.metrics.power_se;
        row["rejection_rate"] = r.metrics.rejection_rate;
        row["rejection_se"] = r.metrics.rejection_se;
        if (r.metrics.rmse_weights) {
            row["rmse_weights"] = *r.metrics.rmse_weights;
        } else {
            row["rmse_weights"] = nullptr;
        }
        row["diverged"] = r.metrics.diverged_count;
        row["replications"] = r.replications;
        row["seed"] = r.seed;
        arr.push_back(row);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open report file: " + path);
    out << arr.dump(2) << '\n';
}

inline void emit_weight_curves_csv(const std::vector<WeightCurveRow>& rows,
                                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open report file: " + path);
    out << "scenario,n,zeta,method,x,w_mean,w_lo,w_hi,replications\n";
    for (const auto& r : rows) {
        out << dif_source_name(r.scenario) << ',' << r.n << ',' << detail::fmt(r.zeta) << ','
            << method_name(r.method) << ',' << detail::fmt(r.x) << ',' << detail::fmt(r.w_mean)
            << ',' << detail::fmt(r.w_lo) << ',' << detail::fmt(r.w_hi) << ','
            << r.replications << '\n';
    }
}

}  // namespace kdif
