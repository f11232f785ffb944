#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdif/bootstrap.hpp"
#include "kdif/logistic.hpp"
#include "kdif/method.hpp"
#include "kdif/parallel.hpp"
#include "kdif/statistic.hpp"
#include "kdif/support.hpp"

#include <json.hpp>

// Dataset analysis pipeline: run the selected detection methods on every
// item of a loaded response matrix and produce the plot-ready artifacts
// (per-item result rows, smoothed response curves on a fixed grid, and
// decile-binned empirical proportions).

namespace kdif {

struct AnalyzeOptions {
    std::vector<double> zetas{7.0 / 24.0};
    KernelKind kernel = KernelKind::epanechnikov;
    std::vector<Method> methods{Method::np_fixed, Method::np_optimal_boot, Method::logistic};
    double alpha = 0.05;
    std::size_t support_cap = 2000;
    std::size_t bootstrap_B = 500;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
};

struct ItemResultRow {
    std::size_t item = 0;
    std::string item_name;
    Method method{};
    double zeta = 0.0;
    double statistic = 0.0;  // z for the nonparametric tests, chi2 for logistic
    double p_value = 1.0;
    bool reject = false;
    std::string flags;  // semicolon-joined diagnostics, empty when clean
};

struct CurveRow {
    std::size_t item = 0;
    std::string item_name;
    std::string group;
    double zeta = 0.0;
    double x = 0.0;
    double irc = 0.0;
};

struct ProportionRow {
    std::size_t item = 0;
    std::string item_name;
    std::string group;
    std::size_t decile = 0;  // 1-based
    double score_mean = 0.0;
    double proportion = 0.0;
    std::size_t count = 0;
};

struct AnalyzeReport {
    std::vector<ItemResultRow> results;
    std::vector<CurveRow> curves;
    std::vector<ProportionRow> proportions;
};

namespace detail {

inline constexpr std::size_t irc_grid_size = 101;

// Decile edges of the pooled criterion: nearest-rank quantiles at k/10.
[[nodiscard]] inline std::vector<double> decile_edges(std::vector<double> sorted_scores) {
    std::vector<double> edges(9);
    const std::size_t n = sorted_scores.size();
    for (std::size_t k = 1; k <= 9; ++k) {
        const auto idx = static_cast<std::size_t>(
            std::ceil(static_cast<double>(k * n) / 10.0));
        edges[k - 1] = sorted_scores[std::min(idx, n) - 1];
    }
    return edges;
}

[[nodiscard]] inline std::size_t decile_of(double x, const std::vector<double>& edges) {
    std::size_t d = 0;
    while (d < edges.size() && x > edges[d]) ++d;
    return d + 1;  // 1..10
}

inline void append_flag(std::string& flags, const char* flag) {
    if (!flags.empty()) flags += ';';
    flags += flag;
}

}  // namespace detail

// Run every selected method on every item for each requested zeta. The
// grouped scores, support and smoothing matrices are shared across items;
// items run in parallel and the row order is fixed by (zeta, item, method)
// regardless of the worker count.
[[nodiscard]] inline AnalyzeReport analyze_dataset(const ResponseMatrix& rm,
                                                   const AnalyzeOptions& opt) {
    if (opt.methods.empty()) throw std::invalid_argument("analyze_dataset: no methods selected");
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) {
        throw std::invalid_argument("analyze_dataset: alpha must lie in (0,1)");
    }
    for (const Method m : opt.methods) {
        if (m == Method::np_optimal_true) {
            throw std::invalid_argument(
                "analyze_dataset: np_optimal_true needs known curves and only applies to "
                "simulated data");
        }
    }
    if (opt.zetas.empty()) throw std::invalid_argument("analyze_dataset: no zeta values given");

    const auto scores = standardized_total_score(rm);
    const GroupedScores gs = split_groups(rm, scores);
    const std::size_t n_items = rm.items;
    const std::size_t n_methods = opt.methods.size();

    bool any_boot = false;
    for (const Method m : opt.methods) any_boot = any_boot || (m == Method::np_optimal_boot);
    bool any_np = false;
    for (const Method m : opt.methods) any_np = any_np || (m != Method::logistic);

    AnalyzeReport report;

    // Decile bins do not depend on zeta or method; emit them once per item.
    {
        std::vector<double> sorted_scores = scores;
        std::sort(sorted_scores.begin(), sorted_scores.end());
        const auto edges = detail::decile_edges(std::move(sorted_scores));
        for (std::size_t item = 0; item < n_items; ++item) {
            // score sum, response sum, count per (group, decile)
            double ssum[2][10] = {}, rsum[2][10] = {};
            std::size_t cnt[2][10] = {};
            for (std::size_t p = 0; p < rm.n; ++p) {
                const std::size_t g = rm.group[p];
                const std::size_t d = detail::decile_of(scores[p], edges) - 1;
                ssum[g][d] += scores[p];
                rsum[g][d] += rm.at(p, item);
                ++cnt[g][d];
            }
            for (std::size_t g = 0; g < 2; ++g) {
                const std::string& label = (g == 0) ? rm.reference_label : rm.focal_label;
                for (std::size_t d = 0; d < 10; ++d) {
                    if (cnt[g][d] == 0) continue;
                    const auto c = static_cast<double>(cnt[g][d]);
                    report.proportions.push_back({item, rm.item_names[item], label, d + 1,
                                                  ssum[g][d] / c, rsum[g][d] / c, cnt[g][d]});
                }
            }
        }
    }

    const auto lo = std::min_element(scores.begin(), scores.end());
    const auto hi = std::max_element(scores.begin(), scores.end());
    const auto grid = linspace(*lo, *hi, detail::irc_grid_size);

    for (std::size_t zi = 0; zi < opt.zetas.size(); ++zi) {
        const double zeta = opt.zetas[zi];
        const SmoothingConfig cfg{opt.kernel, zeta};
        const std::uint64_t zeta_key = std::bit_cast<std::uint64_t>(zeta);

        AnalysisContext ctx;
        WeightMatrix G0, G1;
        if (any_np) {
            Rng rng_supp = derive_stream(opt.seed, 0xA7A1u, zeta_key);
            const SupportSet support = build_support(gs, opt.support_cap, rng_supp);
            ctx = AnalysisContext::build(gs, scores, support, cfg, any_boot);
            G0 = RankSmoother(gs.theta0, cfg).matrix(grid);
            G1 = RankSmoother(gs.theta1, cfg).matrix(grid);
        }

        std::vector<std::vector<ItemResultRow>> rows(n_items);
        std::vector<std::vector<CurveRow>> curve_rows(n_items);

        parallel_for(n_items, opt.jobs, [&](std::size_t item) {
            std::vector<double> y0, y1;
            if (any_np) {
                ctx.split_item(rm, item, y0, y1);
                const std::vector<double> irc0 = G0.apply(y0);
                const std::vector<double> irc1 = G1.apply(y1);
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    curve_rows[item].push_back(
                        {item, rm.item_names[item], rm.reference_label, zeta, grid[i], irc0[i]});
                }
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    curve_rows[item].push_back(
                        {item, rm.item_names[item], rm.focal_label, zeta, grid[i], irc1[i]});
                }
            }

            for (std::size_t mi = 0; mi < n_methods; ++mi) {
                const Method method = opt.methods[mi];
                ItemResultRow row;
                row.item = item;
                row.item_name = rm.item_names[item];
                row.method = method;
                row.zeta = zeta;

                switch (method) {
                    case Method::logistic: {
                        const auto y = rm.item_column(item);
                        const LrtResult lrt = lrt_dif(scores, rm.group, y);
                        row.statistic = lrt.chi2;
                        row.p_value = lrt.p;
                        if (!lrt.converged) detail::append_flag(row.flags, "not_converged");
                        break;
                    }
                    case Method::np_fixed: {
                        const DifResult r =
                            z_test_item(ctx, item, y0, y1, fixed_weights(ctx.support), "np_fixed");
                        row.statistic = r.z;
                        row.p_value = r.p_value;
                        if (r.degenerate) detail::append_flag(row.flags, "degenerate");
                        break;
                    }
                    case Method::np_optimal_asymptotic: {
                        std::vector<double> m0, m1;
                        curves_at_support(ctx, y0, y1, m0, m1);
                        const EstimatedWeights ew = estimated_weights_from_curves(ctx, m0, m1);
                        const DifResult r = z_test_item(ctx, item, y0, y1, ew.w,
                                                        "np_optimal_asymptotic", ew.diverged);
                        row.statistic = r.z;
                        row.p_value = r.p_value;
                        if (r.degenerate) detail::append_flag(row.flags, "degenerate");
                        if (ew.diverged) detail::append_flag(row.flags, "weight_divergence");
                        break;
                    }
                    case Method::np_optimal_boot: {
                        BootstrapConfig bcfg;
                        bcfg.B = opt.bootstrap_B;
                        bcfg.seed = mix64(opt.seed ^ mix64(zeta_key));
                        bcfg.pooled_smoothing = cfg;
                        const auto y = rm.item_column(item);
                        const std::vector<double> yhat = ctx.Vpool.apply(y);
                        const DifResult r = wild_bootstrap_item(ctx, item, y0, y1, yhat, bcfg);
                        row.statistic = r.z;
                        row.p_value = r.p_value;
                        if (r.degenerate) detail::append_flag(row.flags, "degenerate");
                        if (r.weight_divergence) {
                            detail::append_flag(row.flags, "weight_divergence");
                        }
                        break;
                    }
                    default:
                        throw std::logic_error("analyze_dataset: unhandled method");
                }
                row.reject = row.p_value < opt.alpha;
                rows[item].push_back(std::move(row));
            }
        });

        for (std::size_t item = 0; item < n_items; ++item) {
            report.results.insert(report.results.end(), rows[item].begin(), rows[item].end());
            report.curves.insert(report.curves.end(), curve_rows[item].begin(),
                                 curve_rows[item].end());
        }
    }
    return report;
}

namespace detail {

[[nodiscard]] inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace detail

inline void write_results_csv(const std::vector<ItemResultRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "item,item_name,method,zeta,statistic,p_value,reject,flags\n";
    for (const auto& r : rows) {
        out << r.item << ',' << r.item_name << ',' << method_name(r.method) << ','
            << detail::fmt_g(r.zeta) << ',' << detail::fmt_g(r.statistic) << ','
            << detail::fmt_g(r.p_value) << ',' << (r.reject ? 1 : 0) << ',' << r.flags << '\n';
    }
}

inline void write_results_json(const std::vector<ItemResultRow>& rows, const std::string& path) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["item"] = r.item;
        row["item_name"] = r.item_name;
        row["method"] = method_name(r.method);
        row["zeta"] = r.zeta;
        row["statistic"] = r.statistic;
        row["p_value"] = r.p_value;
        row["reject"] = r.reject;
        row["flags"] = r.flags;
        arr.push_back(row);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << arr.dump(2) << '\n';
}

inline void write_curves_csv(const std::vector<CurveRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "item,item_name,group,zeta,x,irc\n";
    for (const auto& r : rows) {
        out << r.item << ',' << r.item_name << ',' << r.group << ',' << detail::fmt_g(r.zeta)
            << ',' << detail::fmt_g(r.x) << ',' << detail::fmt_g(r.irc) << '\n';
    }
}

inline void write_proportions_csv(const std::vector<ProportionRow>& rows,
                                  const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "item,item_name,group,decile,score_mean,proportion,count\n";
    for (const auto& r : rows) {
        out << r.item << ',' << r.item_name << ',' << r.group << ',' << r.decile << ','
            << detail::fmt_g(r.score_mean) << ',' << detail::fmt_g(r.proportion) << ','
            << r.count << '\n';
    }
}

}  // namespace kdif
