#include <cmath>

#include "doctest.h"
#include "melab/attack.hpp"
#include "melab/errors.hpp"
#include "melab/rng.hpp"
#include "test_support.hpp"

using namespace melab;
using namespace melab::attack;

TEST_CASE("query set arithmetic: prior first, ood fill to the budget") {
    const auto& t = melab::testing::desk_task();
    const auto split = data::split_prior(t.train, 0.5, 3);
    QueryPolicy policy{0.5, OodSource::random, t.train.size(), LabelMode::soft};
    const auto qs = build_query_set(policy, split.prior, t.box, 5);
    CHECK(qs.size() == t.train.size());
    std::size_t prior_count = 0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        if (qs.tags[i] == SourceTag::prior) {
            ++prior_count;
            CHECK(i < split.prior.size());  // prior block comes first
            CHECK(qs.true_labels[i] >= 0);
        } else {
            CHECK(qs.true_labels[i] == -1);
        }
    }
    CHECK(prior_count == split.prior.size());
}

TEST_CASE("no-prior and prior-only policies") {
    const auto& t = melab::testing::desk_task();
    data::Dataset empty_prior;
    empty_prior.samples = Mat(0, 2);
    const auto all_ood = build_query_set(QueryPolicy{0.0, OodSource::random, 2000,
                                                     LabelMode::soft},
                                         empty_prior, t.box, 7);
    CHECK(all_ood.size() == 2000);
    for (const auto tag : all_ood.tags) CHECK(tag == SourceTag::ood);

    const auto split = data::split_prior(t.train, 0.1, 9);
    const auto baseline = build_query_set(
        QueryPolicy{0.1, OodSource::none, split.prior.size(), LabelMode::soft}, split.prior,
        t.box, 9);
    CHECK(baseline.size() == split.prior.size());
    CHECK(baseline.size() == 120);  // round(0.1 * 1200)
}

TEST_CASE("budget exactness holds for random policies") {
    const auto& t = melab::testing::desk_task();
    Rng rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const double p = rng.uniform(0.0, 0.6);
        const auto split = data::split_prior(t.train, p, rng.next_u64());
        const std::size_t budget = split.prior.size() + rng.index(1500);
        const auto qs = build_query_set(QueryPolicy{p, OodSource::random, budget,
                                                    LabelMode::soft},
                                        split.prior, t.box, rng.next_u64());
        CHECK(qs.size() == budget);
    }
}

TEST_CASE("invalid budgets are configuration errors") {
    const auto& t = melab::testing::desk_task();
    const auto split = data::split_prior(t.train, 0.5, 3);
    CHECK_THROWS_AS(build_query_set(QueryPolicy{0.5, OodSource::random,
                                                split.prior.size() - 1, LabelMode::soft},
                                    split.prior, t.box, 1),
                    ConfigError);
    CHECK_THROWS_AS(build_query_set(QueryPolicy{0.5, OodSource::none, split.prior.size() + 5,
                                                LabelMode::soft},
                                    split.prior, t.box, 1),
                    ConfigError);
}

TEST_CASE("label modes: soft rows normalize, label-only is the argmax one-hot") {
    const auto& t = melab::testing::desk_task();
    const auto split = data::split_prior(t.train, 0.2, 5);
    const auto qs = build_query_set(QueryPolicy{0.2, OodSource::random, 400, LabelMode::soft},
                                    split.prior, t.box, 11);
    const ModelTarget target(t.victim, 1.0);
    const auto soft = query_victim(target, qs, LabelMode::soft);
    const auto hard = query_victim(target, qs, LabelMode::label_only);
    for (std::size_t i = 0; i < soft.size(); ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < soft.n_classes(); ++c) sum += soft.responses(i, c);
        CHECK(std::fabs(sum - 1.0) < 1e-9);
        const int top = model::argmax(soft.responses.row(i));
        for (std::size_t c = 0; c < hard.n_classes(); ++c)
            CHECK(hard.responses(i, c) ==
                  (c == static_cast<std::size_t>(top) ? 1.0 : 0.0));
    }
}

TEST_CASE("ground truth responses need prior queries") {
    const auto& t = melab::testing::desk_task();
    const auto split = data::split_prior(t.train, 0.2, 5);
    const ModelTarget target(t.victim, 1.0);

    const auto prior_only = build_query_set(
        QueryPolicy{0.2, OodSource::none, split.prior.size(), LabelMode::ground_truth},
        split.prior, t.box, 1);
    const auto gt = query_victim(target, prior_only, LabelMode::ground_truth);
    for (std::size_t i = 0; i < gt.size(); ++i)
        CHECK(gt.responses(i, static_cast<std::size_t>(split.prior.labels[i])) == 1.0);

    const auto with_ood = build_query_set(
        QueryPolicy{0.2, OodSource::random, 400, LabelMode::ground_truth}, split.prior, t.box,
        1);
    CHECK_THROWS_AS(query_victim(target, with_ood, LabelMode::ground_truth), InputError);
}

TEST_CASE("hybrid at tau=0 answers exactly like the original model") {
    const auto& t = melab::testing::desk_task();
    const auto h = instrument::make_hybrid(t.victim, t.fake, 0.0, 2.0);
    const auto split = data::split_prior(t.train, 0.1, 7);
    const auto qs = build_query_set(QueryPolicy{0.1, OodSource::random, 300, LabelMode::soft},
                                    split.prior, t.box, 13);
    const auto via_hybrid = query_victim(HybridTarget(h), qs, LabelMode::soft);
    const auto via_model = query_victim(ModelTarget(t.victim, 2.0), qs, LabelMode::soft);
    CHECK(via_hybrid.responses.a == via_model.responses.a);
}

TEST_CASE("attacker training is deterministic and survives tiny data") {
    const auto& t = melab::testing::desk_task();
    const auto split = data::split_prior(t.train, 0.01, 3);
    const auto qs = build_query_set(
        QueryPolicy{0.01, OodSource::none, split.prior.size(), LabelMode::soft}, split.prior,
        t.box, 1);
    const auto lqs = query_victim(ModelTarget(t.victim, 1.0), qs, LabelMode::soft);
    REQUIRE(lqs.size() == 12);
    model::TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 55;
    const auto a1 = train_attacker(lqs, {16}, cfg);
    const auto a2 = train_attacker(lqs, {16}, cfg);
    CHECK(a1.weights[0].a == a2.weights[0].a);

    attack::LabeledQuerySet empty;
    CHECK_THROWS_AS(train_attacker(empty, {16}, cfg), InputError);
}

TEST_CASE("evaluation: victim copy agrees fully, random weights are chance") {
    const auto& t = melab::testing::desk_task();
    const auto copy_result = evaluate_attack(t.victim, t.victim, t.test);
    CHECK(copy_result.agreement_real == 1.0);
    CHECK(copy_result.gap == 0.0);

    const auto random_net = model::init_mlp({2, 32, 32, 10}, model::Activation::relu, 1234);
    const auto rnd = evaluate_attack(random_net, t.victim, t.test);
    CHECK(rnd.attack_accuracy < 0.35);  // chance is 0.10
    CHECK(rnd.agreement_real < 0.40);
}

TEST_CASE("retraining on the full ground truth recovers the victim") {
    const auto& t = melab::testing::desk_task();
    const auto split = data::split_prior(t.train, 1.0, 3);
    const auto qs = build_query_set(
        QueryPolicy{1.0, OodSource::none, t.train.size(), LabelMode::ground_truth}, split.prior,
        t.box, 1);
    const auto lqs = query_victim(ModelTarget(t.victim, 1.0), qs, LabelMode::ground_truth);
    double worst_gap = 0.0;
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        model::TrainConfig cfg;
        cfg.epochs = 40;
        cfg.seed = seed;
        const auto attacker = train_attacker(lqs, {32, 32}, cfg);
        const auto res = evaluate_attack(attacker, t.victim, t.test);
        worst_gap = std::max(worst_gap, std::fabs(res.gap));
    }
    CHECK(worst_gap <= 0.02);
}

TEST_CASE("diminishing returns from doubling the ood fill at high prior") {
    const auto& t = melab::testing::desk_task();
    double acc_b1 = 0.0, acc_b2 = 0.0;
    const int n_seeds = 5;
    for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
        const auto split = data::split_prior(t.train, 0.3, seed);
        for (const std::size_t budget : {t.train.size(), 2 * t.train.size()}) {
            const auto qs =
                build_query_set(QueryPolicy{0.3, OodSource::random, budget, LabelMode::soft},
                                split.prior, t.box, derive_seed(seed, "q"));
            const auto lqs = query_victim(ModelTarget(t.victim, 1.0), qs, LabelMode::soft);
            model::TrainConfig cfg;
            cfg.epochs = 30;
            cfg.seed = derive_seed(seed, "train");
            const auto attacker = train_attacker(lqs, {32, 32}, cfg);
            const double acc = model::accuracy(attacker, t.test);
            (budget == t.train.size() ? acc_b1 : acc_b2) += acc / n_seeds;
        }
    }
    CHECK(acc_b2 - acc_b1 <= 0.02);
}
