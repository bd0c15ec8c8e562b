#pragma once

#include <cstdint>
#include <vector>

#include "melab/mat.hpp"

namespace melab::instrument {

struct KMeansResult {
    Mat centroids;                     // exactly m rows
    std::vector<int> assignment;       // per input row
    std::vector<double> inertia_trace; // within-cluster SS after each assignment
    int iters = 0;
};

// Lloyd's algorithm with seeded k-means++ initialization. Ties in the
// assignment go to the lowest centroid index; an emptied cluster is re-seeded
// on the point farthest from its own centroid.
KMeansResult kmeans(const Mat& X, int m, std::uint64_t seed, int max_iters = 100);

}  // namespace melab::instrument
