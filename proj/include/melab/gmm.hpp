#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "melab/mat.hpp"
#include "melab/rng.hpp"

namespace melab::instrument {

// Diagonal-covariance Gaussian mixture fitted by EM.
struct Gmm {
    std::vector<double> weights;      // k, non-negative, sum to 1
    Mat means;                        // k x dim
    Mat vars;                         // k x dim, floored at var_floor
    std::vector<double> ll_trace;     // mean log-likelihood after each iteration
    bool converged = false;

    std::size_t n_components() const { return weights.size(); }
    std::size_t dim() const { return means.cols; }
};

struct GmmFitOptions {
    int max_iters = 200;
    double tol = 1e-8;          // relative change of mean log-likelihood
    double var_floor = 1e-6;
};

double gmm_log_pdf(const Gmm& g, std::span<const double> x);

// EM with seeded initialization (k distinct data rows as means, per-dim data
// variance). Variance floors are part of the model family, so the recorded
// log-likelihood trace is non-decreasing. A fit that hits max_iters returns
// converged=false (best-so-far parameters).
Gmm fit_gmm(const Mat& X, int k, std::uint64_t seed, const GmmFitOptions& opt = {});

std::vector<double> sample_gmm(const Gmm& g, Rng& rng);

// Index of the component with the largest weight (lowest index on ties).
std::size_t heaviest_component(const Gmm& g);

}  // namespace melab::instrument
