#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

// Scalar special functions and quadrature helpers used across the library.
// All functions are pure; accuracy notes are given where an algorithm has a
// documented error bound.

namespace kdif {

// Numerically stable logistic function: never evaluates exp of a large
// positive argument.
[[nodiscard]] inline double expit(double x) noexcept {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double t = std::exp(x);
    return t / (1.0 + t);
}

[[nodiscard]] inline double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("logit: argument must lie in (0,1)");
    }
    return std::log(p / (1.0 - p));
}

[[nodiscard]] inline double normal_pdf(double x) noexcept {
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

[[nodiscard]] inline double normal_cdf(double x) noexcept {
    constexpr double inv_sqrt_2 = 0.70710678118654752440;
    return 0.5 * std::erfc(-x * inv_sqrt_2);
}

// Inverse standard normal CDF. Acklam's rational approximation followed by a
// single Halley refinement against erfc; absolute error is near machine
// precision over (0,1).
[[nodiscard]] inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: argument must lie in (0,1)");
    }
    constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
    constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
    constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley step: e = Phi(x) - p, u = e / phi(x).
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

namespace detail {

// Regularized lower incomplete gamma P(a,x) by series expansion; valid and
// fast for x < a + 1.
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by continued fraction (modified
// Lentz); valid for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// Upper tail of the chi-square distribution with df degrees of freedom,
// accurate to roughly 1e-10 over the usable range.
[[nodiscard]] inline double chi2_sf(double x, double df) {
    if (df <= 0.0) throw std::domain_error("chi2_sf: df must be positive");
    if (x <= 0.0) return 1.0;
    const double a = 0.5 * df;
    const double t = 0.5 * x;
    if (t < a + 1.0) {
        return 1.0 - detail::gamma_p_series(a, t);
    }
    return detail::gamma_q_cf(a, t);
}

// Trapezoid rule over matched abscissae/ordinates.
[[nodiscard]] inline double trapezoid(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("trapezoid: need matched vectors of size >= 2");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        acc += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    }
    return acc;
}

[[nodiscard]] inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
    if (count < 2) throw std::invalid_argument("linspace: need at least 2 points");
    std::vector<double> out(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = lo + step * static_cast<double>(i);
    }
    out.back() = hi;
    return out;
}

}  // namespace kdif
