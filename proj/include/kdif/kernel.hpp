#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "kdif/math.hpp"

// Kernel machinery for item response curve estimation: compactly supported
// kernels, empirical CDFs, rank-based nearest-neighbor regression weights,
// and a binned Gaussian KDE for the score densities.

namespace kdif {

enum class KernelKind { epanechnikov, uniform };

// Both kernels are symmetric, non-negative, integrate to 1, and vanish
// exactly outside [-1,1].
[[nodiscard]] inline double kernel_eval(KernelKind kind, double u) noexcept {
    if (u < -1.0 || u > 1.0) return 0.0;
    if (kind == KernelKind::epanechnikov) return 0.75 * (1.0 - u * u);
    return 0.5;
}

struct SmoothingConfig {
    KernelKind kernel = KernelKind::epanechnikov;
    double zeta = 7.0 / 24.0;
};

// h(n) = n^(-zeta). Consistency of the curve estimates requires
// zeta in (1/4, 1/3); values outside are accepted for experimentation.
[[nodiscard]] inline double bandwidth(std::size_t n, double zeta) {
    if (n == 0) throw std::invalid_argument("bandwidth: n must be positive");
    return std::pow(static_cast<double>(n), -zeta);
}

[[nodiscard]] constexpr bool zeta_in_theory_range(double zeta) noexcept {
    return zeta > 0.25 && zeta < 1.0 / 3.0;
}

// Right-continuous empirical CDF: F(x) = #{values <= x} / size.
class Ecdf {
  public:
    explicit Ecdf(std::span<const double> values) : sorted_(values.begin(), values.end()) {
        if (sorted_.empty()) throw std::invalid_argument("Ecdf: empty sample");
        std::sort(sorted_.begin(), sorted_.end());
    }

    [[nodiscard]] double operator()(double x) const noexcept {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

    [[nodiscard]] std::size_t size() const noexcept { return sorted_.size(); }

  private:
    std::vector<double> sorted_;
};

// Dense row-major weight matrix: rows index evaluation points, columns index
// respondents of one group. Every row is a probability vector.
struct WeightMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> w;

    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return w[r * cols + c]; }

    // m_hat = W y.
    [[nodiscard]] std::vector<double> apply(std::span<const double> y) const {
        std::vector<double> out(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* wr = w.data() + r * cols;
            double acc = 0.0;
            for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * y[c];
            out[r] = acc;
        }
        return out;
    }

    // out = W Y for Y with `width` columns stored row-major (cols x width).
    // out must hold rows*width doubles; it is overwritten.
    void apply_columns(const double* Y, std::size_t width, double* out) const {
        for (std::size_t r = 0; r < rows; ++r) {
            double* dst = out + r * width;
            std::fill(dst, dst + width, 0.0);
            const double* wr = w.data() + r * cols;
            for (std::size_t c = 0; c < cols; ++c) {
                const double wv = wr[c];
                if (wv == 0.0) continue;
                const double* src = Y + c * width;
                for (std::size_t b = 0; b < width; ++b) dst[b] += wv * src[b];
            }
        }
    }
};

// Rank-based kernel smoother for one group. The weight of respondent p at
// query x is K((F(theta_p) - F(x))/h) renormalized over the group, with F the
// group ECDF and h = n^(-zeta); only ranks enter, so any strictly monotone
// transformation applied to both scores and query leaves the weights
// unchanged.
class RankSmoother {
  public:
    RankSmoother(std::span<const double> scores, SmoothingConfig cfg)
        : F_(scores), cfg_(cfg), h_(bandwidth(scores.size(), cfg.zeta)) {
        ranks_.reserve(scores.size());
        for (const double s : scores) ranks_.push_back(F_(s));
    }

    [[nodiscard]] std::size_t size() const noexcept { return ranks_.size(); }

    // Fills out (length size()) with the weights at x; they sum to 1.
    void weights_at(double x, std::span<double> out) const {
        const double fx = F_(x);
        double sum = 0.0;
        for (std::size_t p = 0; p < ranks_.size(); ++p) {
            const double k = kernel_eval(cfg_.kernel, (ranks_[p] - fx) / h_);
            out[p] = k;
            sum += k;
        }
        if (sum <= 0.0) {
            throw std::runtime_error("nn_weights: no neighbors within bandwidth");
        }
        const double inv = 1.0 / sum;
        for (std::size_t p = 0; p < ranks_.size(); ++p) out[p] *= inv;
    }

    [[nodiscard]] WeightMatrix matrix(std::span<const double> eval_points) const {
        WeightMatrix m;
        m.rows = eval_points.size();
        m.cols = ranks_.size();
        m.w.resize(m.rows * m.cols);
        for (std::size_t r = 0; r < m.rows; ++r) {
            weights_at(eval_points[r], std::span<double>(m.w.data() + r * m.cols, m.cols));
        }
        return m;
    }

  private:
    Ecdf F_;
    SmoothingConfig cfg_;
    double h_;
    std::vector<double> ranks_;
};

[[nodiscard]] inline std::vector<double> nn_weights(std::span<const double> group_scores, double x,
                                                    const SmoothingConfig& cfg) {
    const RankSmoother smoother(group_scores, cfg);
    std::vector<double> out(group_scores.size());
    smoother.weights_at(x, out);
    return out;
}

// Nearest-neighbor curve estimate m_hat(x) = sum_p y_p W_p(x) at each
// evaluation point; values stay in [0,1] for binary responses.
[[nodiscard]] inline std::vector<double> irc_estimate(std::span<const double> responses,
                                                      std::span<const double> group_scores,
                                                      std::span<const double> eval_points,
                                                      const SmoothingConfig& cfg) {
    if (responses.size() != group_scores.size()) {
        throw std::invalid_argument("irc_estimate: responses and scores differ in length");
    }
    const RankSmoother smoother(group_scores, cfg);
    std::vector<double> buf(group_scores.size());
    std::vector<double> out(eval_points.size());
    for (std::size_t r = 0; r < eval_points.size(); ++r) {
        smoother.weights_at(eval_points[r], buf);
        double acc = 0.0;
        for (std::size_t p = 0; p < buf.size(); ++p) acc += buf[p] * responses[p];
        out[r] = acc;
    }
    return out;
}

// Bernoulli conditional variance at a curve value.
// Tolerates the rounding drift a convex combination of {0,1} responses can
// produce; genuinely out-of-range values still throw.
[[nodiscard]] inline double conditional_variance(double m_hat) {
    constexpr double slack = 1e-9;
    if (!(m_hat >= -slack && m_hat <= 1.0 + slack)) {
        throw std::domain_error("conditional_variance: curve value outside [0,1]");
    }
    const double m = std::clamp(m_hat, 0.0, 1.0);
    return m * (1.0 - m);
}

// Binned Gaussian kernel density estimate on a fixed grid, queried by linear
// interpolation. Outputs are floored at 1e-12 so downstream ratios stay
// finite.
class KdeDensity {
  public:
    KdeDensity(std::span<const double> values, std::span<const double> weights,
               double effective_n) {
        if (values.size() < 2) throw std::invalid_argument("kde_density: need at least 2 values");
        if (values.size() != weights.size()) {
            throw std::invalid_argument("kde_density: weight length mismatch");
        }
        double wsum = 0.0, mean = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            wsum += weights[i];
            mean += weights[i] * values[i];
        }
        if (wsum <= 0.0) throw std::invalid_argument("kde_density: non-positive total weight");
        mean /= wsum;
        double ss = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            ss += weights[i] * (values[i] - mean) * (values[i] - mean);
        }
        const double denom = wsum - 1.0;
        const double sd = (denom > 0.0) ? std::sqrt(ss / denom) : 0.0;
        if (sd <= 0.0) throw std::domain_error("kde_density: degenerate sample (zero spread)");

        bw_ = 1.06 * sd * std::pow(effective_n, -0.2);
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        lo_ = *mn - 3.0 * bw_;
        const double hi = *mx + 3.0 * bw_;
        dx_ = (hi - lo_) / static_cast<double>(grid_size - 1);

        // Linear binning: each observation splits its mass between the two
        // surrounding grid nodes.
        std::vector<double> mass(grid_size, 0.0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double t = (values[i] - lo_) / dx_;
            const auto j = static_cast<std::size_t>(t);
            const double frac = t - static_cast<double>(j);
            mass[j] += weights[i] * (1.0 - frac);
            if (j + 1 < grid_size) mass[j + 1] += weights[i] * frac;
        }

        density_.assign(grid_size, 0.0);
        const double inv_bw = 1.0 / bw_;
        const double norm = 1.0 / wsum;
        // Gaussian contributions beyond 6 bandwidths are below 1e-8 of the
        // peak; the window keeps the convolution O(grid * window).
        const auto window = static_cast<std::ptrdiff_t>(std::ceil(6.0 * bw_ / dx_));
        for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(grid_size); ++j) {
            if (mass[j] == 0.0) continue;
            const double mj = mass[j] * norm * inv_bw;
            const auto klo = std::max<std::ptrdiff_t>(0, j - window);
            const auto khi = std::min<std::ptrdiff_t>(grid_size - 1, j + window);
            for (std::ptrdiff_t k = klo; k <= khi; ++k) {
                const double u = static_cast<double>(k - j) * dx_ * inv_bw;
                density_[k] += mj * normal_pdf(u);
            }
        }
        for (double& d : density_) d = std::max(d, floor_value);
    }

    // Linear interpolation on the grid; queries beyond it get the (floored)
    // boundary value.
    [[nodiscard]] double operator()(double x) const noexcept {
        const double t = (x - lo_) / dx_;
        if (t <= 0.0) return density_.front();
        if (t >= static_cast<double>(grid_size - 1)) return density_.back();
        const auto j = static_cast<std::size_t>(t);
        const double frac = t - static_cast<double>(j);
        return std::max((1.0 - frac) * density_[j] + frac * density_[j + 1], floor_value);
    }

    [[nodiscard]] double bandwidth_value() const noexcept { return bw_; }
    [[nodiscard]] double grid_lo() const noexcept { return lo_; }
    [[nodiscard]] double grid_dx() const noexcept { return dx_; }
    [[nodiscard]] const std::vector<double>& grid_density() const noexcept { return density_; }

    static constexpr std::size_t grid_size = 401;
    static constexpr double floor_value = 1e-12;

  private:
    double lo_ = 0.0, dx_ = 1.0, bw_ = 1.0;
    std::vector<double> density_;
};

[[nodiscard]] inline KdeDensity kde_density(std::span<const double> values) {
    const std::vector<double> ones(values.size(), 1.0);
    return KdeDensity(values, ones, static_cast<double>(values.size()));
}

[[nodiscard]] inline KdeDensity kde_density_weighted(std::span<const double> values,
                                                     std::span<const double> weights,
                                                     double effective_n) {
    return KdeDensity(values, weights, effective_n);
}

}  // namespace kdif
