#include <cmath>

#include "doctest.h"
#include "melab/dataset.hpp"
#include "melab/errors.hpp"
#include "melab/mlp.hpp"
#include "melab/rng.hpp"

using namespace melab;
using namespace melab::model;

namespace {

// Test-only separability oracle: the perceptron algorithm terminates with a
// zero-error hyperplane iff the two classes are linearly separable.
bool perceptron_separable(const data::Dataset& ds, int max_epochs = 200) {
    std::vector<double> w(ds.samples.cols + 1, 0.0);
    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        int errors = 0;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            double z = w.back();
            for (std::size_t d = 0; d < ds.samples.cols; ++d) z += w[d] * ds.samples(i, d);
            const int pred = z >= 0.0 ? 1 : 0;
            if (pred != ds.labels[i]) {
                const double step = ds.labels[i] == 1 ? 1.0 : -1.0;
                for (std::size_t d = 0; d < ds.samples.cols; ++d)
                    w[d] += step * ds.samples(i, d);
                w.back() += step;
                ++errors;
            }
        }
        if (errors == 0) return true;
    }
    return false;
}

// A model with hand-set weights so that logits(x) == x.
MLPClassifier identity_logit_model(int dim) {
    MLPClassifier m = init_mlp({dim, dim}, Activation::relu, 1);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m.weights[0](r, c) = r == c ? 1.0 : 0.0;
    for (double& b : m.biases[0]) b = 0.0;
    return m;
}

}  // namespace

TEST_CASE("training separates linearly separable blobs") {
    const auto spec = data::make_blobs(2, 2, 3.0, 0.4);
    const auto ds = data::sample_ind(spec, 400, 3);
    REQUIRE(perceptron_separable(ds));  // oracle first
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.seed = 5;
    const auto m = train(ds, {16}, 2, cfg);
    CHECK(accuracy(m, ds) >= 0.99);
    CHECK(m.epoch_loss.back() < m.epoch_loss.front());
}

TEST_CASE("constant labels are learned everywhere") {
    const auto spec = data::make_blobs(2, 2, 3.0, 0.6);
    auto ds = data::sample_ind(spec, 100, 9);
    for (auto& y : ds.labels) y = 1;
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.seed = 2;
    const auto m = train(ds, {8}, 2, cfg);
    CHECK(accuracy(m, ds) == 1.0);
}

TEST_CASE("training is deterministic per seed") {
    const auto spec = data::make_blobs(3, 2, 2.5, 0.5);
    const auto ds = data::sample_ind(spec, 200, 4);
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.seed = 77;
    const auto m1 = train(ds, {12}, 3, cfg);
    const auto m2 = train(ds, {12}, 3, cfg);
    CHECK(m1.weights[0].a == m2.weights[0].a);
    CHECK(m1.weights[1].a == m2.weights[1].a);
    CHECK(m1.biases[1] == m2.biases[1]);
}

TEST_CASE("input dimension mismatch is a configuration error") {
    const auto spec = data::make_blobs(2, 2, 3.0, 0.4);
    const auto ds = data::sample_ind(spec, 50, 3);
    TrainConfig cfg;
    const auto m = train(ds, {8}, 2, cfg);
    const std::vector<double> wrong{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(predict_proba(m, wrong, 1.0), InputError);
}

TEST_CASE("softmax temperature: frozen closed-form values") {
    const auto m = identity_logit_model(2);
    const std::vector<double> x{2.0, 0.0};
    const auto p1 = predict_proba(m, x, 1.0);
    CHECK(p1[0] == doctest::Approx(0.8808).epsilon(1e-4));
    CHECK(p1[1] == doctest::Approx(0.1192).epsilon(1e-4));
    const auto p2 = predict_proba(m, x, 2.0);
    CHECK(p2[0] == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(p2[1] == doctest::Approx(0.2689).epsilon(1e-4));

    const auto m4 = identity_logit_model(4);
    const std::vector<double> flat{1.7, 1.7, 1.7, 1.7};
    for (double t : {0.5, 1.0, 3.0}) {
        const auto p = predict_proba(m4, flat, t);
        for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
    }
    CHECK_THROWS_AS(predict_proba(m, x, 0.0), InputError);
}

TEST_CASE("probability rows are normalized and argmax is T-invariant") {
    Rng rng(15);
    const auto m = identity_logit_model(5);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x(5);
        for (double& v : x) v = rng.uniform(-30.0, 30.0);
        const auto pa = predict_proba(m, x, 1.0);
        const auto pb = predict_proba(m, x, 2.0);
        const auto pc = predict_proba(m, x, 0.25);
        double sum = 0.0;
        for (double v : pa) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(std::fabs(sum - 1.0) < 1e-9);
        const int ia = argmax({pa.data(), pa.size()});
        CHECK(ia == argmax({pb.data(), pb.size()}));
        CHECK(ia == argmax({pc.data(), pc.size()}));
    }
}

TEST_CASE("confidence: frozen values and temperature flattening") {
    const auto m = identity_logit_model(2);
    CHECK(confidence(m, std::vector<double>{10.0, 0.0}, 1.0) ==
          doctest::Approx(0.99995).epsilon(1e-4));
    const auto m4 = identity_logit_model(4);
    CHECK(confidence(m4, std::vector<double>{1.0, 1.0, 1.0, 1.0}, 1.0) ==
          doctest::Approx(0.25));

    Rng rng(8);
    for (int t = 0; t < 300; ++t) {
        std::vector<double> x(4);
        for (double& v : x) v = rng.uniform(-5.0, 5.0);
        const double c1 = confidence(m4, x, 1.0);
        const double c2 = confidence(m4, x, 2.0);
        CHECK(c2 <= c1 + 1e-12);
    }
}

TEST_CASE("analytic gradient matches central differences") {
    Rng rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        const bool use_tanh = trial % 2 == 0;
        MLPClassifier m = init_mlp({3, 5, 4, 3}, use_tanh ? Activation::tanh : Activation::relu,
                                   1000 + trial);
        Mat X(6, 3);
        for (double& v : X.a) v = rng.uniform(-1.5, 1.5);
        Mat T(6, 3);
        for (std::size_t i = 0; i < 6; ++i) {
            std::vector<double> t{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)};
            const double s = t[0] + t[1] + t[2];
            for (std::size_t c = 0; c < 3; ++c) T(i, c) = t[c] / s;
        }
        const auto analytic = loss_gradient(m, X, T);
        auto theta = flatten_params(m);
        const double h = 1e-5;
        double worst_num = 0.0, worst_den = 0.0;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            MLPClassifier probe = m;
            auto tp = theta;
            tp[k] += h;
            unflatten_params(probe, tp);
            const double up = loss_value(probe, X, T);
            tp[k] -= 2 * h;
            unflatten_params(probe, tp);
            const double dn = loss_value(probe, X, T);
            const double numeric = (up - dn) / (2 * h);
            worst_num = std::max(worst_num, std::fabs(numeric - analytic[k]));
            worst_den = std::max(worst_den, std::fabs(analytic[k]));
        }
        CHECK(worst_num / std::max(worst_den, 1e-8) < 1e-4);
    }
}

TEST_CASE("full-batch loss is non-increasing on a convex instance") {
    // Single linear layer + softmax cross-entropy is convex; with batch_size
    // = n and a small learning rate the loss curve must not increase.
    const auto spec = data::make_blobs(3, 2, 2.0, 0.7);
    const auto ds = data::sample_ind(spec, 120, 6);
    TrainConfig cfg;
    cfg.epochs = 40;
    cfg.batch_size = 120;
    cfg.learning_rate = 0.05;
    cfg.momentum = 0.0;
    cfg.seed = 3;
    const auto m = train(ds, {}, 3, cfg);
    for (std::size_t e = 1; e < m.epoch_loss.size(); ++e)
        CHECK(m.epoch_loss[e] <= m.epoch_loss[e - 1] + 1e-10);
}

TEST_CASE("model json round trip preserves predictions") {
    const auto spec = data::make_blobs(2, 3, 2.0, 0.5);
    const auto ds = data::sample_ind(spec, 80, 12);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 21;
    const auto m = train(ds, {7}, 2, cfg, Activation::tanh);
    const auto back = mlp_from_json(to_json(m));
    CHECK(back.activation == Activation::tanh);
    for (std::size_t i = 0; i < 10; ++i) {
        const auto a = predict_proba(m, ds.samples.row(i), 2.0);
        const auto b = predict_proba(back, ds.samples.row(i), 2.0);
        for (std::size_t c = 0; c < a.size(); ++c) CHECK(a[c] == b[c]);
    }
}
