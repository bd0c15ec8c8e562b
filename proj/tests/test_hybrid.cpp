#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "melab/errors.hpp"
#include "melab/hybrid.hpp"
#include "test_support.hpp"

using namespace melab;
using namespace melab::instrument;

TEST_CASE("tau=0 routes everything to the original model") {
    const auto& t = melab::testing::desk_task();
    const auto h = make_hybrid(t.victim, t.fake, 0.0, 2.0);
    for (std::size_t i = 0; i < 200; ++i) {
        const auto resp = hybrid_predict(h, t.test.samples.row(i));
        CHECK(resp.route == Route::original);
        CHECK(model::argmax({resp.probs.data(), resp.probs.size()}) ==
              model::predict_class(t.victim, t.test.samples.row(i)));
    }
    CHECK(measure_fpr(h, t.test) == 0.0);
    CHECK(measure_hybrid_accuracy(h, t.test) ==
          doctest::Approx(model::accuracy(t.victim, t.test)));
}

TEST_CASE("tau=1 routes everything to the fake model") {
    const auto& t = melab::testing::desk_task();
    const auto h = make_hybrid(t.victim, t.fake, 1.0, 2.0);
    for (std::size_t i = 0; i < 100; ++i)
        CHECK(hybrid_predict(h, t.test.samples.row(i)).route == Route::fake);
    CHECK(measure_fpr(h, t.test) == 1.0);
    // Derangements keep the fake model from answering with the true class on
    // well-anchored queries.
    CHECK(measure_hybrid_accuracy(h, t.test) < 0.15);
}

TEST_CASE("routing predicate is literally confidence > tau") {
    const auto& t = melab::testing::desk_task();
    for (double tau : {0.5, 0.9, 0.99}) {
        const auto h = make_hybrid(t.victim, t.fake, tau, 2.0);
        for (std::size_t i = 0; i < 300; ++i) {
            const auto x = t.test.samples.row(i);
            const bool expected_original = model::confidence(t.victim, x, 2.0) > tau;
            const auto resp = hybrid_predict(h, x);
            CHECK((resp.route == Route::original) == expected_original);
        }
    }
}

TEST_CASE("fpr grows with tau and with temperature") {
    const auto& t = melab::testing::desk_task();
    const double f75 = measure_fpr(make_hybrid(t.victim, t.fake, 0.75, 2.0), t.test);
    const double f95 = measure_fpr(make_hybrid(t.victim, t.fake, 0.95, 2.0), t.test);
    CHECK(f95 >= f75);
    for (double tau : {0.75, 0.9, 0.95}) {
        const double f1 = measure_fpr(make_hybrid(t.victim, t.fake, tau, 1.0), t.test);
        const double f2 = measure_fpr(make_hybrid(t.victim, t.fake, tau, 2.0), t.test);
        CHECK(f2 >= f1);
    }
}

TEST_CASE("hybrid accuracy is non-increasing across a tau sweep") {
    const auto& t = melab::testing::desk_task();
    double prev_acc = 1.0;
    for (double tau : {0.0, 0.75, 0.9, 0.95, 0.99}) {
        const auto h = make_hybrid(t.victim, t.fake, tau, 2.0);
        const double acc = measure_hybrid_accuracy(h, t.test);
        CHECK(acc <= prev_acc + 1e-12);
        prev_acc = acc;
    }
}

TEST_CASE("empty test sets and bad parameters are rejected") {
    const auto& t = melab::testing::desk_task();
    const auto h = make_hybrid(t.victim, t.fake, 0.9, 2.0);
    data::Dataset empty;
    empty.samples = Mat(0, 2);
    CHECK_THROWS_AS(measure_fpr(h, empty), InputError);
    CHECK_THROWS_AS(measure_hybrid_accuracy(h, empty), InputError);
    CHECK_THROWS_AS(make_hybrid(t.victim, t.fake, 1.5, 2.0), ConfigError);
    CHECK_THROWS_AS(make_hybrid(t.victim, t.fake, 0.5, 0.0), ConfigError);
}

TEST_CASE("fake argmax stays decorrelated from the victim on false positives") {
    const auto& t = melab::testing::desk_task();
    const auto h = make_hybrid(t.victim, t.fake, 0.9, 2.0);
    std::size_t fp = 0, agree = 0;
    for (std::size_t i = 0; i < t.test.size(); ++i) {
        const auto x = t.test.samples.row(i);
        const auto resp = hybrid_predict(h, x);
        if (resp.route != Route::fake) continue;
        ++fp;
        if (model::argmax({resp.probs.data(), resp.probs.size()}) ==
            model::predict_class(t.victim, x))
            ++agree;
    }
    REQUIRE(fp > 20);
    CHECK(static_cast<double>(agree) / static_cast<double>(fp) <= 0.2);  // 2/C
}
