#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "melab/dataset.hpp"
#include "melab/gmm.hpp"
#include "melab/mat.hpp"
#include "melab/mlp.hpp"

namespace melab::instrument {

enum class FeatureExtractor { identity, victim_penultimate };

// Permutation layout for the anchor slots: `identity` disables permutations
// (ablation control), `shared` uses one derangement for every slot,
// `distinct` gives each slot its own derangement.
enum class PermMode { identity, shared, distinct };

struct FitFakeOptions {
    std::size_t per_class_samples = 5000;  // capped at the class size
    int anchors_per_class = 5;             // m
    int k_gmm = 3;
    FeatureExtractor phi = FeatureExtractor::identity;
    PermMode perm_mode = PermMode::distinct;
};

// Per-class logit-space GMMs, C x m feature-space anchor points, and m class
// permutations. Queries are assigned to the nearest anchor, re-labeled
// through that slot's permutation, and answered with a logit sampled from the
// permuted class's GMM.
struct FakeModel {
    int n_classes = 0;
    int m = 0;
    std::vector<Gmm> gmms;                // C entries, logit space
    Mat anchors;                          // (C*m) x feat_dim, row = class*m + slot
    std::vector<std::vector<int>> perms;  // m permutations over {0..C-1}
    FeatureExtractor phi = FeatureExtractor::identity;
    std::uint64_t sampling_salt = 0;
    bool em_warning = false;              // some class GMM hit max iterations

    std::size_t feature_dim() const { return anchors.cols; }
};

struct AnchorId {
    int class_id = 0;
    int slot = 0;
};

// Derangement over {0..C-1} sampled by rejection.
std::vector<int> sample_derangement(int n, Rng& rng);

std::vector<double> fake_features(const FakeModel& f, const model::MLPClassifier& victim,
                                  std::span<const double> x);

FakeModel fit_fake_model(const model::MLPClassifier& victim, const data::Dataset& train,
                         const FitFakeOptions& opt, std::uint64_t seed);

// Nearest anchor over all C*m centroids in L2; ties resolve to the lowest
// (class, slot).
AnchorId assign_anchor(const FakeModel& f, std::span<const double> features);

// Deterministic per query: the sampling RNG is seeded from the model salt and
// the query bytes. The returned argmax is steered to the permuted class by
// resampling (16 tries), falling back to the heaviest component mean.
model::ProbVector fake_predict(const FakeModel& f, const model::MLPClassifier& victim,
                               std::span<const double> x, double T);

int fake_class(const FakeModel& f, const model::MLPClassifier& victim,
               std::span<const double> x);

std::string to_json(const FakeModel& f);
FakeModel fake_from_json(const std::string& text);
void save_fake_model(const FakeModel& f, const std::string& path);
FakeModel load_fake_model(const std::string& path);

}  // namespace melab::instrument
