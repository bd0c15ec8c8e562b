#include "melab/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "melab/errors.hpp"

namespace melab::instrument {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_gaussian_diag(std::span<const double> x, const double* mean, const double* var,
                         std::size_t dim) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        const double diff = x[d] - mean[d];
        acc += std::log(var[d]) + diff * diff / var[d];
    }
    return -0.5 * (static_cast<double>(dim) * kLog2Pi + acc);
}

double logsumexp(std::span<const double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

double gmm_log_pdf(const Gmm& g, std::span<const double> x) {
    std::vector<double> lw(g.n_components());
    for (std::size_t c = 0; c < g.n_components(); ++c) {
        lw[c] = std::log(std::max(g.weights[c], 1e-300)) +
                log_gaussian_diag(x, g.means.row_ptr(c), g.vars.row_ptr(c), g.dim());
    }
    return logsumexp(lw);
}

Gmm fit_gmm(const Mat& X, int k, std::uint64_t seed, const GmmFitOptions& opt) {
    if (k < 1) throw ConfigError("gmm: k must be >= 1");
    if (X.rows == 0) throw InputError("gmm: empty data");
    const std::size_t n = X.rows;
    const std::size_t dim = X.cols;
    const auto kk = static_cast<std::size_t>(k);

    Gmm g;
    g.weights.assign(kk, 1.0 / static_cast<double>(kk));
    g.means = Mat(kk, dim);
    g.vars = Mat(kk, dim);

    // Init: k rows drawn without replacement (cycling when k > n), variances
    // from the per-dimension data spread.
    Rng rng(seed);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    for (std::size_t c = 0; c < kk; ++c) {
        const std::size_t src = idx[c % n];
        for (std::size_t d = 0; d < dim; ++d) g.means(c, d) = X(src, d);
    }
    std::vector<double> mean(dim, 0.0), var(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) mean[d] += X(i, d);
    for (double& v : mean) v /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = X(i, d) - mean[d];
            var[d] += diff * diff;
        }
    for (std::size_t d = 0; d < dim; ++d) {
        var[d] = std::max(var[d] / static_cast<double>(n), opt.var_floor);
        for (std::size_t c = 0; c < kk; ++c) g.vars(c, d) = var[d];
    }

    Mat resp(n, kk);
    std::vector<double> lw(kk);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < opt.max_iters; ++iter) {
        // E-step.
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < kk; ++c)
                lw[c] = std::log(std::max(g.weights[c], 1e-300)) +
                        log_gaussian_diag(X.row(i), g.means.row_ptr(c), g.vars.row_ptr(c), dim);
            const double lse = logsumexp(lw);
            ll += lse;
            for (std::size_t c = 0; c < kk; ++c) resp(i, c) = std::exp(lw[c] - lse);
        }
        ll /= static_cast<double>(n);
        g.ll_trace.push_back(ll);

        // M-step. Components that lose all responsibility keep their previous
        // parameters (their weight goes to ~0).
        for (std::size_t c = 0; c < kk; ++c) {
            double rsum = 0.0;
            for (std::size_t i = 0; i < n; ++i) rsum += resp(i, c);
            g.weights[c] = rsum / static_cast<double>(n);
            if (rsum < 1e-12) continue;
            for (std::size_t d = 0; d < dim; ++d) {
                double m1 = 0.0;
                for (std::size_t i = 0; i < n; ++i) m1 += resp(i, c) * X(i, d);
                g.means(c, d) = m1 / rsum;
            }
            for (std::size_t d = 0; d < dim; ++d) {
                double m2 = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double diff = X(i, d) - g.means(c, d);
                    m2 += resp(i, c) * diff * diff;
                }
                g.vars(c, d) = std::max(m2 / rsum, opt.var_floor);
            }
        }

        if (std::isfinite(prev_ll) && std::fabs(ll - prev_ll) <= opt.tol * (1.0 + std::fabs(ll))) {
            g.converged = true;
            break;
        }
        prev_ll = ll;
    }
    return g;
}

std::vector<double> sample_gmm(const Gmm& g, Rng& rng) {
    const double u = rng.uniform();
    std::size_t c = 0;
    double acc = 0.0;
    for (; c < g.n_components(); ++c) {
        acc += g.weights[c];
        if (u < acc) break;
    }
    if (c == g.n_components()) c = g.n_components() - 1;
    std::vector<double> x(g.dim());
    for (std::size_t d = 0; d < g.dim(); ++d)
        x[d] = rng.normal(g.means(c, d), std::sqrt(g.vars(c, d)));
    return x;
}

std::size_t heaviest_component(const Gmm& g) {
    return static_cast<std::size_t>(
        std::max_element(g.weights.begin(), g.weights.end()) - g.weights.begin());
}

}  // namespace melab::instrument
