#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "kdif/math.hpp"

// Logistic-regression baseline: maximum-likelihood fits by Newton/IRLS with
// step halving, and the two-degree-of-freedom likelihood-ratio screen that
// tests the group main effect and the score-by-group interaction jointly.

namespace kdif {

struct LogisticFit {
    std::vector<double> beta;
    double log_likelihood = 0.0;
    bool converged = false;
    bool separation = false;
    std::size_t iterations = 0;
};

namespace detail {

inline double bernoulli_loglik(const std::vector<double>& eta, const std::vector<double>& y) {
    double ll = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        // log(1 + exp(eta)) without overflow.
        const double softplus =
            (eta[i] > 0.0) ? eta[i] + std::log1p(std::exp(-eta[i])) : std::log1p(std::exp(eta[i]));
        ll += y[i] * eta[i] - softplus;
    }
    return ll;
}

// Solve the k x k symmetric positive system H x = g in place by Gaussian
// elimination with partial pivoting; k is at most 4 here.
inline std::vector<double> solve_small(std::vector<double> H, std::vector<double> g,
                                       std::size_t k) {
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (std::fabs(H[r * k + col]) > std::fabs(H[piv * k + col])) piv = r;
        }
        if (H[piv * k + col] == 0.0) {
            throw std::runtime_error("fit_logistic: singular information matrix");
        }
        if (piv != col) {
            for (std::size_t c = 0; c < k; ++c) std::swap(H[col * k + c], H[piv * k + c]);
            std::swap(g[col], g[piv]);
        }
        const double inv = 1.0 / H[col * k + col];
        for (std::size_t r = col + 1; r < k; ++r) {
            const double f = H[r * k + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < k; ++c) H[r * k + c] -= f * H[col * k + c];
            g[r] -= f * g[col];
        }
    }
    std::vector<double> x(k, 0.0);
    for (std::size_t r = k; r-- > 0;) {
        double acc = g[r];
        for (std::size_t c = r + 1; c < k; ++c) acc -= H[r * k + c] * x[c];
        x[r] = acc / H[r * k + r];
    }
    return x;
}

}  // namespace detail

// Newton/IRLS maximizer of the Bernoulli log-likelihood for a dense n x k
// design (row-major). Convergence: gradient max-norm below 1e-8 within 100
// iterations. Steps that would lower the likelihood are halved; coefficients
// drifting past 30 on the logit scale are treated as (quasi-)separation and
// flagged rather than iterated to infinity.
[[nodiscard]] inline LogisticFit fit_logistic(const std::vector<double>& design, std::size_t k,
                                              const std::vector<double>& y) {
    if (k == 0 || y.empty() || design.size() != y.size() * k) {
        throw std::invalid_argument("fit_logistic: design/response size mismatch");
    }
    const std::size_t n = y.size();
    constexpr double grad_tol = 1e-8;
    constexpr double beta_limit = 30.0;
    constexpr std::size_t max_iter = 100;

    LogisticFit fit;
    fit.beta.assign(k, 0.0);
    std::vector<double> eta(n, 0.0), mu(n), grad(k), H(k * k);
    double ll = detail::bernoulli_loglik(eta, y);

    for (fit.iterations = 0; fit.iterations < max_iter; ++fit.iterations) {
        for (std::size_t i = 0; i < n; ++i) mu[i] = expit(eta[i]);

        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(H.begin(), H.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = design.data() + i * k;
            const double resid = y[i] - mu[i];
            const double w = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
            for (std::size_t a = 0; a < k; ++a) {
                grad[a] += xi[a] * resid;
                for (std::size_t b = a; b < k; ++b) H[a * k + b] += w * xi[a] * xi[b];
            }
        }
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < a; ++b) H[a * k + b] = H[b * k + a];
        }

        double gmax = 0.0;
        for (const double g : grad) gmax = std::max(gmax, std::fabs(g));
        if (gmax < grad_tol) {
            fit.converged = true;
            break;
        }

        const auto delta = detail::solve_small(H, grad, k);
        double step = 1.0;
        std::vector<double> beta_try(k), eta_try(n);
        double ll_try = ll;
        for (int halving = 0; halving < 40; ++halving) {
            for (std::size_t a = 0; a < k; ++a) beta_try[a] = fit.beta[a] + step * delta[a];
            for (std::size_t i = 0; i < n; ++i) {
                const double* xi = design.data() + i * k;
                double e = 0.0;
                for (std::size_t a = 0; a < k; ++a) e += xi[a] * beta_try[a];
                eta_try[i] = e;
            }
            ll_try = detail::bernoulli_loglik(eta_try, y);
            if (ll_try >= ll - 1e-12) break;
            step *= 0.5;
        }
        fit.beta = beta_try;
        eta = eta_try;
        ll = ll_try;

        for (const double b : fit.beta) {
            if (std::fabs(b) > beta_limit) fit.separation = true;
        }
        if (fit.separation) break;
    }
    fit.log_likelihood = ll;
    return fit;
}

struct LrtResult {
    double chi2 = 0.0;
    std::size_t df = 2;
    double p = 1.0;
    bool converged = true;
};

// Likelihood-ratio DIF screen for one item: full model
// logit P = b0 + b1*score + b2*group + b3*score*group against the nested
// null logit P = b0 + b1*score. Two degrees of freedom.
[[nodiscard]] inline LrtResult lrt_dif(const std::vector<double>& scores,
                                       const std::vector<std::uint8_t>& group,
                                       const std::vector<double>& responses) {
    const std::size_t n = responses.size();
    if (scores.size() != n || group.size() != n) {
        throw std::invalid_argument("lrt_dif: input length mismatch");
    }

    std::vector<double> full(n * 4), null(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = static_cast<double>(group[i]);
        full[i * 4 + 0] = 1.0;
        full[i * 4 + 1] = scores[i];
        full[i * 4 + 2] = g;
        full[i * 4 + 3] = scores[i] * g;
        null[i * 2 + 0] = 1.0;
        null[i * 2 + 1] = scores[i];
    }
    const LogisticFit f_full = fit_logistic(full, 4, responses);
    const LogisticFit f_null = fit_logistic(null, 2, responses);

    LrtResult res;
    res.chi2 = 2.0 * (f_full.log_likelihood - f_null.log_likelihood);
    if (res.chi2 < 0.0) {
        if (res.chi2 < -1e-6) throw std::runtime_error("lrt_dif: nested likelihood inversion");
        res.chi2 = 0.0;
    }
    res.p = chi2_sf(res.chi2, 2.0);
    res.converged = f_full.converged && f_null.converged;
    return res;
}

}  // namespace kdif
