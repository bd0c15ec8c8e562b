#include "melab/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "melab/errors.hpp"
#include "melab/io.hpp"
#include "melab/kernels.hpp"
#include "melab/rng.hpp"

namespace melab::model {

namespace {

double activate(double v, Activation act) {
    return act == Activation::relu ? (v > 0.0 ? v : 0.0) : std::tanh(v);
}

double activate_grad(double post, Activation act) {
    // Both derivatives are expressible from the post-activation value.
    return act == Activation::relu ? (post > 0.0 ? 1.0 : 0.0) : 1.0 - post * post;
}

// Forward pass keeping post-activation values of every layer (index 0 is the
// input itself); logits land in acts.back().
void forward_collect(const MLPClassifier& m, std::span<const double> x,
                     std::vector<std::vector<double>>& acts) {
    const std::size_t L = m.weights.size();
    acts.resize(L + 1);
    acts[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < L; ++l) {
        const Mat& W = m.weights[l];
        const auto& b = m.biases[l];
        auto& out = acts[l + 1];
        out.resize(W.rows);
        const bool last = l + 1 == L;
        for (std::size_t r = 0; r < W.rows; ++r) {
            const double z = kernels::dot(W.row_ptr(r), acts[l].data(), W.cols) + b[r];
            out[r] = last ? z : activate(z, m.activation);
        }
    }
}

Mat one_hot_targets(const std::vector<int>& labels, int n_classes) {
    Mat t(labels.size(), static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes)
            throw InputError("train: label out of range");
        t(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return t;
}

struct GradBuffers {
    std::vector<Mat> gw;
    std::vector<std::vector<double>> gb;

    explicit GradBuffers(const MLPClassifier& m) {
        for (const Mat& w : m.weights) gw.emplace_back(w.rows, w.cols);
        for (const auto& b : m.biases) gb.emplace_back(b.size(), 0.0);
    }
    void zero() {
        for (Mat& g : gw) std::fill(g.a.begin(), g.a.end(), 0.0);
        for (auto& g : gb) std::fill(g.begin(), g.end(), 0.0);
    }
};

// Accumulates d(xent)/d(params) for one sample into g. Returns the sample's
// cross-entropy against the target row.
double backprop_one(const MLPClassifier& m, std::span<const double> x,
                    std::span<const double> target, GradBuffers& g,
                    std::vector<std::vector<double>>& acts) {
    forward_collect(m, x, acts);
    const std::size_t L = m.weights.size();
    const auto probs = softmax(acts[L], 1.0);

    double loss = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        if (target[c] > 0.0) loss -= target[c] * std::log(std::max(probs[c], 1e-300));
    }

    // delta at the output: p - t (softmax + cross-entropy).
    std::vector<double> delta(probs.size());
    for (std::size_t c = 0; c < probs.size(); ++c) delta[c] = probs[c] - target[c];

    std::vector<double> delta_prev;
    for (std::size_t l = L; l-- > 0;) {
        const Mat& W = m.weights[l];
        const auto& in = acts[l];
        for (std::size_t r = 0; r < W.rows; ++r) {
            kernels::axpy(delta[r], in.data(), g.gw[l].row_ptr(r), W.cols);
            g.gb[l][r] += delta[r];
        }
        if (l == 0) break;
        delta_prev.assign(W.cols, 0.0);
        for (std::size_t r = 0; r < W.rows; ++r)
            kernels::axpy(delta[r], W.row_ptr(r), delta_prev.data(), W.cols);
        for (std::size_t c = 0; c < W.cols; ++c)
            delta_prev[c] *= activate_grad(acts[l][c], m.activation);
        delta.swap(delta_prev);
    }
    return loss;
}

MLPClassifier train_core(const Mat& X, const Mat& targets, const std::vector<int>& hidden,
                         const TrainConfig& cfg, Activation act, const data::Dataset* eval,
                         TrainTrace* trace) {
    if (X.rows == 0) throw InputError("train: empty training set");
    if (targets.rows != X.rows) throw InputError("train: targets misaligned with inputs");
    if (cfg.epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
    if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");

    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(X.cols));
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(static_cast<int>(targets.cols));

    MLPClassifier m = init_mlp(sizes, act, derive_seed(cfg.seed, "mlp-init"));
    GradBuffers grad(m), vel(m);
    std::vector<std::vector<double>> acts;

    std::vector<std::size_t> order(X.rows);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(cfg.seed, "mlp-shuffle"));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t pos = 0;
        while (pos < order.size()) {
            const std::size_t bsz =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                      order.size() - pos);
            grad.zero();
            for (std::size_t k = 0; k < bsz; ++k) {
                const std::size_t i = order[pos + k];
                epoch_loss += backprop_one(m, X.row(i), targets.row(i), grad, acts);
            }
            const double step = cfg.learning_rate / static_cast<double>(bsz);
            for (std::size_t l = 0; l < m.weights.size(); ++l) {
                auto& v = vel.gw[l].a;
                auto& g = grad.gw[l].a;
                auto& w = m.weights[l].a;
                for (std::size_t k = 0; k < w.size(); ++k) {
                    v[k] = cfg.momentum * v[k] - step * g[k];
                    w[k] += v[k];
                }
                auto& vb = vel.gb[l];
                auto& gb = grad.gb[l];
                auto& b = m.biases[l];
                for (std::size_t k = 0; k < b.size(); ++k) {
                    vb[k] = cfg.momentum * vb[k] - step * gb[k];
                    b[k] += vb[k];
                }
            }
            pos += bsz;
        }
        m.epoch_loss.push_back(epoch_loss / static_cast<double>(X.rows));
        if (trace) {
            trace->loss.push_back(m.epoch_loss.back());
            if (eval) trace->eval_acc.push_back(accuracy(m, *eval));
        }
    }
    m.trained = true;
    m.seed = cfg.seed;
    return m;
}

}  // namespace

MLPClassifier init_mlp(const std::vector<int>& layer_sizes, Activation act,
                       std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw ConfigError("mlp: need at least input and output layers");
    for (int s : layer_sizes)
        if (s < 1) throw ConfigError("mlp: layer sizes must be positive");
    MLPClassifier m;
    m.layer_sizes = layer_sizes;
    m.activation = act;
    m.seed = seed;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(layer_sizes[l]);
        const auto fan_out = static_cast<std::size_t>(layer_sizes[l + 1]);
        const double lim = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Mat w(fan_out, fan_in);
        for (double& v : w.a) v = rng.uniform(-lim, lim);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(fan_out, 0.0);
    }
    return m;
}

MLPClassifier train(const data::Dataset& ds, const std::vector<int>& hidden, int n_classes,
                    const TrainConfig& cfg, Activation act, const data::Dataset* eval,
                    TrainTrace* trace) {
    if (!ds.labeled()) throw InputError("train: hard-label training needs labels");
    const Mat targets = one_hot_targets(ds.labels, n_classes);
    return train_core(ds.samples, targets, hidden, cfg, act, eval, trace);
}

MLPClassifier train_soft(const SoftTargets& st, const std::vector<int>& hidden,
                         const TrainConfig& cfg, Activation act, const data::Dataset* eval,
                         TrainTrace* trace) {
    return train_core(st.inputs, st.targets, hidden, cfg, act, eval, trace);
}

std::vector<double> logits(const MLPClassifier& m, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(m.input_dim()))
        throw InputError("mlp: input dimension mismatch");
    std::vector<std::vector<double>> acts;
    forward_collect(m, x, acts);
    return acts.back();
}

std::vector<double> penultimate(const MLPClassifier& m, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(m.input_dim()))
        throw InputError("mlp: input dimension mismatch");
    std::vector<std::vector<double>> acts;
    forward_collect(m, x, acts);
    return acts[acts.size() - 2];
}

ProbVector softmax(std::span<const double> z, double T) {
    if (!(T > 0.0)) throw InputError("softmax: temperature must be positive");
    const double zmax = *std::max_element(z.begin(), z.end());
    ProbVector p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp((z[i] - zmax) / T);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

ProbVector predict_proba(const MLPClassifier& m, std::span<const double> x, double T) {
    return softmax(logits(m, x), T);
}

double confidence(const MLPClassifier& m, std::span<const double> x, double T) {
    const auto p = predict_proba(m, x, T);
    return *std::max_element(p.begin(), p.end());
}

int argmax(std::span<const double> v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

int predict_class(const MLPClassifier& m, std::span<const double> x) {
    return argmax(logits(m, x));
}

double accuracy(const MLPClassifier& m, const data::Dataset& ds) {
    if (!ds.labeled() || ds.size() == 0) throw InputError("accuracy: labeled data required");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (predict_class(m, ds.samples.row(i)) == ds.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ds.size());
}

std::vector<double> flatten_params(const MLPClassifier& m) {
    std::vector<double> theta;
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        theta.insert(theta.end(), m.weights[l].a.begin(), m.weights[l].a.end());
        theta.insert(theta.end(), m.biases[l].begin(), m.biases[l].end());
    }
    return theta;
}

void unflatten_params(MLPClassifier& m, std::span<const double> theta) {
    std::size_t pos = 0;
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        for (double& v : m.weights[l].a) v = theta[pos++];
        for (double& v : m.biases[l]) v = theta[pos++];
    }
    if (pos != theta.size()) throw InputError("unflatten: parameter count mismatch");
}

std::vector<double> loss_gradient(const MLPClassifier& m, const Mat& X, const Mat& targets) {
    GradBuffers g(m);
    std::vector<std::vector<double>> acts;
    for (std::size_t i = 0; i < X.rows; ++i) backprop_one(m, X.row(i), targets.row(i), g, acts);
    std::vector<double> flat;
    const double inv = 1.0 / static_cast<double>(X.rows);
    for (std::size_t l = 0; l < g.gw.size(); ++l) {
        for (double v : g.gw[l].a) flat.push_back(v * inv);
        for (double v : g.gb[l]) flat.push_back(v * inv);
    }
    return flat;
}

double loss_value(const MLPClassifier& m, const Mat& X, const Mat& targets) {
    double total = 0.0;
    std::vector<std::vector<double>> acts;
    for (std::size_t i = 0; i < X.rows; ++i) {
        forward_collect(m, X.row(i), acts);
        const auto p = softmax(acts.back(), 1.0);
        for (std::size_t c = 0; c < p.size(); ++c)
            if (targets(i, c) > 0.0) total -= targets(i, c) * std::log(std::max(p[c], 1e-300));
    }
    return total / static_cast<double>(X.rows);
}

std::string to_json(const MLPClassifier& m) {
    nlohmann::json j;
    j["layer_sizes"] = m.layer_sizes;
    j["activation"] = m.activation == Activation::relu ? "relu" : "tanh";
    j["trained"] = m.trained;
    j["seed"] = m.seed;
    j["epoch_loss"] = m.epoch_loss;
    auto& w = j["weights"] = nlohmann::json::array();
    for (const Mat& W : m.weights) w.push_back(W.a);
    j["biases"] = m.biases;
    return j.dump(2) + "\n";
}

MLPClassifier mlp_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("model json: ") + e.what());
    }
    MLPClassifier m;
    m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    m.activation = j.at("activation").get<std::string>() == "tanh" ? Activation::tanh
                                                                   : Activation::relu;
    m.trained = j.value("trained", false);
    m.seed = j.value("seed", std::uint64_t{0});
    m.epoch_loss = j.value("epoch_loss", std::vector<double>{});
    const auto ws = j.at("weights");
    const auto bs = j.at("biases");
    if (ws.size() + 1 != m.layer_sizes.size() || bs.size() != ws.size())
        throw IoError("model json: layer count mismatch");
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        Mat W(static_cast<std::size_t>(m.layer_sizes[l + 1]),
              static_cast<std::size_t>(m.layer_sizes[l]));
        const auto flat = ws[l].get<std::vector<double>>();
        if (flat.size() != W.a.size()) throw IoError("model json: weight shape mismatch");
        W.a = flat;
        m.weights.push_back(std::move(W));
        m.biases.push_back(bs[l].get<std::vector<double>>());
        if (m.biases.back().size() != static_cast<std::size_t>(m.layer_sizes[l + 1]))
            throw IoError("model json: bias shape mismatch");
    }
    return m;
}

void save_model(const MLPClassifier& m, const std::string& path) {
    io::write_file(path, to_json(m));
}

MLPClassifier load_model(const std::string& path) {
    return mlp_from_json(io::read_file(path));
}

}  // namespace melab::model
