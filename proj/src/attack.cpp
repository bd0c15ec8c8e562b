#include "melab/attack.hpp"

#include <algorithm>

#include "melab/errors.hpp"
#include "melab/rng.hpp"

namespace melab::attack {

std::string to_string(OodSource s) {
    switch (s) {
        case OodSource::none: return "none";
        case OodSource::random: return "random";
        case OodSource::surrogate: return "surrogate";
        case OodSource::adaptive: return "adaptive";
    }
    return "?";
}

std::string to_string(LabelMode m) {
    switch (m) {
        case LabelMode::soft: return "soft";
        case LabelMode::label_only: return "label-only";
        case LabelMode::ground_truth: return "ground-truth";
    }
    return "?";
}

OodSource ood_source_from_string(const std::string& s) {
    if (s == "none") return OodSource::none;
    if (s == "random") return OodSource::random;
    if (s == "surrogate") return OodSource::surrogate;
    if (s == "adaptive") return OodSource::adaptive;
    throw ConfigError("unknown ood source: " + s);
}

LabelMode label_mode_from_string(const std::string& s) {
    if (s == "soft") return LabelMode::soft;
    if (s == "label-only") return LabelMode::label_only;
    if (s == "ground-truth") return LabelMode::ground_truth;
    throw ConfigError("unknown label mode: " + s);
}

QuerySet build_query_set(const QueryPolicy& policy, const data::Dataset& prior,
                         const data::DistributionSpec& ood_spec, std::uint64_t seed) {
    if (!prior.labeled() && prior.size() > 0)
        throw InputError("build_query_set: prior data must be labeled");
    QuerySet qs;
    qs.queries = Mat(0, prior.size() > 0 ? prior.samples.cols
                                         : static_cast<std::size_t>(ood_spec.dim()));

    if (policy.ood_source == OodSource::none) {
        if (policy.budget != prior.size())
            throw ConfigError("build_query_set: with no ood fill the budget must equal |prior|");
    } else if (policy.budget < prior.size()) {
        throw ConfigError("build_query_set: budget smaller than the prior sample");
    }

    for (std::size_t i = 0; i < prior.size(); ++i) {
        qs.queries.push_row(prior.samples.row(i));
        qs.tags.push_back(SourceTag::prior);
        qs.true_labels.push_back(prior.labels[i]);
    }
    const std::size_t fill = policy.budget - prior.size();
    if (fill > 0) {
        if (policy.ood_source == OodSource::adaptive)
            throw ConfigError("build_query_set: adaptive fill runs through the bandit loop");
        const auto ood = data::sample_ood(ood_spec, fill, derive_seed(seed, "ood-fill"));
        if (ood.samples.cols != qs.queries.cols)
            throw ConfigError("build_query_set: ood dimension mismatch");
        for (std::size_t i = 0; i < ood.size(); ++i) {
            qs.queries.push_row(ood.samples.row(i));
            qs.tags.push_back(SourceTag::ood);
            qs.true_labels.push_back(-1);
        }
    }
    return qs;
}

LabeledQuerySet query_victim(const QueryTarget& target, const QuerySet& qs, LabelMode mode) {
    LabeledQuerySet out;
    out.queries = qs.queries;
    out.tags = qs.tags;
    const auto C = static_cast<std::size_t>(target.original_model().n_classes());
    out.responses = Mat(qs.size(), C);
    out.routes.resize(qs.size(), instrument::Route::original);

    for (std::size_t i = 0; i < qs.size(); ++i) {
        const auto resp = target.respond(qs.queries.row(i));
        out.routes[i] = resp.route;
        switch (mode) {
            case LabelMode::soft:
                for (std::size_t c = 0; c < C; ++c) out.responses(i, c) = resp.probs[c];
                break;
            case LabelMode::label_only: {
                const int top = model::argmax({resp.probs.data(), resp.probs.size()});
                out.responses(i, static_cast<std::size_t>(top)) = 1.0;
                break;
            }
            case LabelMode::ground_truth: {
                if (qs.tags[i] != SourceTag::prior || qs.true_labels[i] < 0)
                    throw InputError("query_victim: ground-truth labels exist only for prior queries");
                out.responses(i, static_cast<std::size_t>(qs.true_labels[i])) = 1.0;
                break;
            }
        }
    }
    return out;
}

model::MLPClassifier train_attacker(const LabeledQuerySet& lqs, const std::vector<int>& hidden,
                                    const model::TrainConfig& cfg, model::Activation act,
                                    const data::Dataset* eval, model::TrainTrace* trace) {
    if (lqs.size() == 0) throw InputError("train_attacker: empty query set");
    model::SoftTargets st;
    st.inputs = lqs.queries;
    st.targets = lqs.responses;
    return model::train_soft(st, hidden, cfg, act, eval, trace);
}

AttackResult evaluate_attack(const model::MLPClassifier& attacker,
                             const model::MLPClassifier& victim, const data::Dataset& ind_test,
                             const FakeRoutedSet* fake_routed,
                             const std::vector<double>* convergence) {
    if (!ind_test.labeled()) throw InputError("evaluate_attack: labeled ind test required");
    AttackResult r;
    r.attack_accuracy = model::accuracy(attacker, ind_test);
    r.victim_accuracy = model::accuracy(victim, ind_test);
    r.gap = r.victim_accuracy - r.attack_accuracy;

    std::size_t agree = 0;
    for (std::size_t i = 0; i < ind_test.size(); ++i) {
        const auto x = ind_test.samples.row(i);
        if (model::predict_class(attacker, x) == model::predict_class(victim, x)) ++agree;
    }
    r.agreement_real = static_cast<double>(agree) / static_cast<double>(ind_test.size());

    if (fake_routed && fake_routed->queries.rows > 0) {
        std::size_t fa = 0;
        for (std::size_t i = 0; i < fake_routed->queries.rows; ++i) {
            if (model::predict_class(attacker, fake_routed->queries.row(i)) ==
                fake_routed->fake_labels[i])
                ++fa;
        }
        r.agreement_fake =
            static_cast<double>(fa) / static_cast<double>(fake_routed->queries.rows);
    }
    if (convergence) r.convergence = *convergence;
    return r;
}

FakeRoutedSet collect_fake_routed(const instrument::HybridVictim& h, const Mat& queries) {
    FakeRoutedSet out;
    out.queries = Mat(0, queries.cols);
    for (std::size_t i = 0; i < queries.rows; ++i) {
        const auto resp = instrument::hybrid_predict(h, queries.row(i));
        if (resp.route == instrument::Route::fake) {
            out.queries.push_row(queries.row(i));
            out.fake_labels.push_back(model::argmax({resp.probs.data(), resp.probs.size()}));
        }
    }
    return out;
}

}  // namespace melab::attack
