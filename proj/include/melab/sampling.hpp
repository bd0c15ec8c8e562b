#pragma once

#include <cstdint>
#include <vector>

#include "melab/dataset.hpp"
#include "melab/mlp.hpp"

namespace melab::sampling {

struct GaussianSpec {
    double mu = 0.0;
    double sigma = 1.0;  // > 0
};

// W2 between 1-D Gaussians: sqrt((mu_a-mu_b)^2 + (sigma_a-sigma_b)^2).
double wasserstein_1d(const GaussianSpec& a, const GaussianSpec& b);

// Overlap coefficient: integral of min(pdf_a, pdf_b), adaptive Simpson over a
// +-10 sigma envelope, absolute error below 1e-6.
double overlap_probability(const GaussianSpec& a, const GaussianSpec& b);

// Monte-Carlo estimate of the same coefficient (P_a[pdf_a <= pdf_b] +
// P_b[pdf_b < pdf_a]).
double overlap_probability_mc(const GaussianSpec& a, const GaussianSpec& b, std::size_t n,
                              std::uint64_t seed);

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

struct OverlapRow {
    GaussianSpec a;
    GaussianSpec b;
    double w2 = 0.0;
    double overlap = 0.0;
    double overlap_mc = 0.0;
};

// n_pairs random (victim sampler, attacker sampler) pairs with mu and sigma
// uniform in the given ranges; sigma draws are floored at 1e-6 to stay
// positive.
std::vector<OverlapRow> sweep_overlap(Range mu_range, Range sigma_range, std::size_t n_pairs,
                                      std::uint64_t seed);

struct VolumeEstimate {
    double fraction_random = 0.0;     // uniform-box queries above the threshold
    double fraction_ind_test = 0.0;   // comparison on real IND data (0 when absent)
};

// Fraction of uniform-box queries whose prediction confidence strictly
// exceeds `threshold` at temperature T, plus the same fraction on an IND test
// set when provided.
VolumeEstimate estimate_ind_volume(const model::MLPClassifier& m, std::size_t n_random,
                                   double threshold, double T,
                                   const data::DistributionSpec& box, std::uint64_t seed,
                                   const data::Dataset* ind_test = nullptr);

// Percent-style convenience: "90" -> 0.90, "0.9" -> 0.9.
double parse_threshold(const std::string& s);

}  // namespace melab::sampling
