#include "melab/hybrid.hpp"

#include <algorithm>

#include "melab/errors.hpp"

namespace melab::instrument {

HybridVictim make_hybrid(model::MLPClassifier original, FakeModel fake, double tau,
                         double temperature) {
    if (tau < 0.0 || tau > 1.0) throw ConfigError("hybrid: tau must be in [0,1]");
    if (!(temperature > 0.0)) throw ConfigError("hybrid: temperature must be positive");
    return {std::move(original), std::move(fake), tau, temperature};
}

HybridResponse hybrid_predict(const HybridVictim& h, std::span<const double> x) {
    const auto probs = model::predict_proba(h.original, x, h.temperature);
    const double conf = *std::max_element(probs.begin(), probs.end());
    if (conf > h.tau) return {probs, Route::original};
    return {fake_predict(h.fake, h.original, x, h.temperature), Route::fake};
}

double measure_fpr(const HybridVictim& h, const data::Dataset& ind_test) {
    if (ind_test.size() == 0) throw InputError("measure_fpr: empty test set");
    std::size_t fake_routed = 0;
    for (std::size_t i = 0; i < ind_test.size(); ++i) {
        if (hybrid_predict(h, ind_test.samples.row(i)).route == Route::fake) ++fake_routed;
    }
    return static_cast<double>(fake_routed) / static_cast<double>(ind_test.size());
}

double measure_hybrid_accuracy(const HybridVictim& h, const data::Dataset& labeled_test) {
    if (labeled_test.size() == 0 || !labeled_test.labeled())
        throw InputError("measure_hybrid_accuracy: labeled test set required");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labeled_test.size(); ++i) {
        const auto resp = hybrid_predict(h, labeled_test.samples.row(i));
        if (model::argmax({resp.probs.data(), resp.probs.size()}) == labeled_test.labels[i])
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labeled_test.size());
}

}  // namespace melab::instrument
