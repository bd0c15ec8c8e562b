#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "melab/mat.hpp"

namespace melab::data {

// Per-class diagonal Gaussian mixture: row c of means/vars describes class c.
struct GaussianMixtureSpec {
    int dim = 0;
    int n_classes = 0;
    Mat means;  // n_classes x dim
    Mat vars;   // n_classes x dim, all entries > 0
};

struct UniformBoxSpec {
    int dim = 0;
    std::vector<double> lo;
    std::vector<double> hi;
};

// Affine-transformed copy of a mixture: x' = scale * x + shift. Models a
// "similar but different" query source with explicit similarity knobs.
struct ShiftedSurrogateSpec {
    GaussianMixtureSpec base;
    std::vector<double> shift;
    double scale = 1.0;
};

struct DistributionSpec {
    std::string id;  // provenance tag carried into datasets
    std::variant<GaussianMixtureSpec, UniformBoxSpec, ShiftedSurrogateSpec> params;

    int dim() const;
    // Throws ConfigError on invalid parameters (non-positive variances, bad
    // box bounds, dimension mismatches).
    void validate() const;
};

struct Dataset {
    Mat samples;              // n x dim
    std::vector<int> labels;  // empty when unlabeled, else aligned 1:1
    std::string spec_id;

    std::size_t size() const { return samples.rows; }
    bool labeled() const { return !labels.empty(); }
};

struct PriorSplit {
    double fraction = 0.0;
    Dataset prior;
    Dataset remainder;
};

// n labeled samples; the label of each sample is the index of the mixture
// component that generated it.
Dataset sample_ind(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

// n unlabeled samples from a uniform box or a shifted surrogate.
Dataset sample_ood(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

// Uniform split without replacement; |prior| = round-half-up(p * |ds|).
PriorSplit split_prior(const Dataset& ds, double p, std::uint64_t seed);

// Spec constructors used by presets and tests.
DistributionSpec make_blobs(int n_classes, int dim, double separation, double sigma,
                            const std::string& id = "blobs");
// Class means on a circle in the first two dimensions; optional extra
// dimensions carry class-independent noise (mean 0, noise_sigma), which makes
// the task sample-hungry without moving the Bayes boundary.
DistributionSpec make_ring_mixture(int n_classes, double radius, double sigma,
                                   const std::string& id = "ring", int dim = 2,
                                   double noise_sigma = 2.0, double angle_offset = 0.0);
DistributionSpec make_uniform_box(int dim, double lo, double hi,
                                  const std::string& id = "box");
DistributionSpec make_surrogate(const DistributionSpec& ind_spec, std::vector<double> shift,
                                double scale, const std::string& id = "surrogate");

// CSV persistence: header x0..x{d-1},label; label column empty when
// unlabeled. A sidecar JSON descriptor stores spec, seed and n.
void save_csv(const Dataset& ds, const std::string& path);
Dataset load_csv(const std::string& path);
void save_descriptor(const DistributionSpec& spec, std::uint64_t seed, std::size_t n,
                     const std::string& path);

}  // namespace melab::data
