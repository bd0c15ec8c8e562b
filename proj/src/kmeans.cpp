#include "melab/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "melab/errors.hpp"
#include "melab/kernels.hpp"
#include "melab/rng.hpp"

namespace melab::instrument {

KMeansResult kmeans(const Mat& X, int m, std::uint64_t seed, int max_iters) {
    if (m < 1) throw ConfigError("kmeans: m must be >= 1");
    if (X.rows < static_cast<std::size_t>(m))
        throw ConfigError("kmeans: fewer points than clusters");
    const std::size_t n = X.rows;
    const std::size_t dim = X.cols;
    const auto mm = static_cast<std::size_t>(m);

    KMeansResult res;
    res.centroids = Mat(mm, dim);
    res.assignment.assign(n, 0);

    // k-means++ seeding.
    Rng rng(seed);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    std::size_t first = rng.index(n);
    for (std::size_t d = 0; d < dim; ++d) res.centroids(0, d) = X(first, d);
    for (std::size_t c = 1; c < mm; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d2 = kernels::squared_l2(X.row_ptr(i), res.centroids.row_ptr(c - 1), dim);
            min_d2[i] = std::min(min_d2[i], d2);
            total += min_d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.index(n);  // all points coincide with chosen centroids
        }
        for (std::size_t d = 0; d < dim; ++d) res.centroids(c, d) = X(pick, d);
    }

    std::vector<double> counts(mm);
    for (int iter = 0; iter < max_iters; ++iter) {
        // Assignment step + inertia.
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (std::size_t c = 0; c < mm; ++c) {
                const double d2 = kernels::squared_l2(X.row_ptr(i), res.centroids.row_ptr(c), dim);
                if (d2 < best) {
                    best = d2;
                    best_c = static_cast<int>(c);
                }
            }
            if (res.assignment[i] != best_c) {
                res.assignment[i] = best_c;
                changed = true;
            }
            inertia += best;
        }
        res.inertia_trace.push_back(inertia);
        res.iters = iter + 1;
        if (!changed && iter > 0) break;

        // Update step.
        Mat sums(mm, dim);
        std::fill(counts.begin(), counts.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            kernels::axpy(1.0, X.row_ptr(i),
                          sums.row_ptr(static_cast<std::size_t>(res.assignment[i])), dim);
            counts[static_cast<std::size_t>(res.assignment[i])] += 1.0;
        }
        for (std::size_t c = 0; c < mm; ++c) {
            if (counts[c] > 0.0) {
                for (std::size_t d = 0; d < dim; ++d) res.centroids(c, d) = sums(c, d) / counts[c];
            } else {
                // Re-seed the empty cluster on the point currently farthest
                // from its assigned centroid; strictly reduces its residual.
                double worst = -1.0;
                std::size_t worst_i = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d2 = kernels::squared_l2(
                        X.row_ptr(i),
                        res.centroids.row_ptr(static_cast<std::size_t>(res.assignment[i])), dim);
                    if (d2 > worst) {
                        worst = d2;
                        worst_i = i;
                    }
                }
                for (std::size_t d = 0; d < dim; ++d) res.centroids(c, d) = X(worst_i, d);
            }
        }
    }
    return res;
}

}  // namespace melab::instrument
