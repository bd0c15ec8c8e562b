#pragma once

#include <span>

#include "melab/dataset.hpp"
#include "melab/fake_model.hpp"
#include "melab/mlp.hpp"

namespace melab::instrument {

enum class Route { original, fake };

struct HybridResponse {
    model::ProbVector probs;
    Route route = Route::original;
};

// Confidence-gated victim: a query answered by the original model when
// confidence(V_o, x, T) > tau, by the fake model otherwise. tau lives in
// [0,1]; percent-style table values {0,75,90,95,99} map to /100.
struct HybridVictim {
    model::MLPClassifier original;
    FakeModel fake;
    double tau = 0.9;
    double temperature = 2.0;
};

HybridVictim make_hybrid(model::MLPClassifier original, FakeModel fake, double tau,
                         double temperature);

HybridResponse hybrid_predict(const HybridVictim& h, std::span<const double> x);

// Share of IND samples answered by the fake model instead of the original.
double measure_fpr(const HybridVictim& h, const data::Dataset& ind_test);

// Top-1 accuracy of the gated responses against ground truth.
double measure_hybrid_accuracy(const HybridVictim& h, const data::Dataset& labeled_test);

}  // namespace melab::instrument
