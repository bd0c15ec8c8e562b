#include "melab/fake_model.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "melab/errors.hpp"
#include "melab/io.hpp"
#include "melab/kernels.hpp"
#include "melab/kmeans.hpp"

namespace melab::instrument {

std::vector<int> sample_derangement(int n, Rng& rng) {
    if (n < 2) throw ConfigError("derangement: need at least 2 elements");
    std::vector<int> p(static_cast<std::size_t>(n));
    while (true) {
        std::iota(p.begin(), p.end(), 0);
        rng.shuffle(p);
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            if (p[static_cast<std::size_t>(i)] == i) {
                ok = false;
                break;
            }
        }
        if (ok) return p;
    }
}

std::vector<double> fake_features(const FakeModel& f, const model::MLPClassifier& victim,
                                  std::span<const double> x) {
    if (f.phi == FeatureExtractor::identity) return {x.begin(), x.end()};
    return model::penultimate(victim, x);
}

FakeModel fit_fake_model(const model::MLPClassifier& victim, const data::Dataset& train,
                         const FitFakeOptions& opt, std::uint64_t seed) {
    if (!train.labeled()) throw InputError("fit_fake_model: labeled training data required");
    if (opt.anchors_per_class < 1) throw ConfigError("fit_fake_model: m must be >= 1");
    if (opt.k_gmm < 1) throw ConfigError("fit_fake_model: k_gmm must be >= 1");
    const int C = victim.n_classes();
    if (C < 2) throw ConfigError("fit_fake_model: need at least 2 classes");

    FakeModel f;
    f.n_classes = C;
    f.m = opt.anchors_per_class;
    f.phi = opt.phi;
    f.sampling_salt = derive_seed(seed, "fake-salt");

    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(C));
    for (std::size_t i = 0; i < train.size(); ++i) {
        const int y = train.labels[i];
        if (y < 0 || y >= C) throw InputError("fit_fake_model: label out of range");
        by_class[static_cast<std::size_t>(y)].push_back(i);
    }

    const std::size_t feat_dim =
        f.phi == FeatureExtractor::identity
            ? train.samples.cols
            : static_cast<std::size_t>(victim.layer_sizes[victim.layer_sizes.size() - 2]);
    f.anchors = Mat(static_cast<std::size_t>(C) * static_cast<std::size_t>(f.m), feat_dim);

    for (int c = 0; c < C; ++c) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        if (members.size() < static_cast<std::size_t>(f.m))
            throw ConfigError("fit_fake_model: class " + std::to_string(c) +
                              " has fewer points than anchors");
        const std::size_t s_eff = std::min(opt.per_class_samples, members.size());
        Rng pick_rng(derive_seed(seed, "fake-class-sample", static_cast<std::uint64_t>(c)));
        for (std::size_t i = 0; i < s_eff && i + 1 < members.size(); ++i)
            std::swap(members[i], members[i + pick_rng.index(members.size() - i)]);

        Mat class_logits(0, static_cast<std::size_t>(C));
        Mat class_feats(0, feat_dim);
        for (std::size_t i = 0; i < s_eff; ++i) {
            const auto row = train.samples.row(members[i]);
            const auto z = model::logits(victim, row);
            class_logits.push_row({z.data(), z.size()});
            const auto ft = fake_features(f, victim, row);
            class_feats.push_row({ft.data(), ft.size()});
        }

        Gmm g = fit_gmm(class_logits, opt.k_gmm,
                        derive_seed(seed, "fake-gmm", static_cast<std::uint64_t>(c)));
        if (!g.converged) f.em_warning = true;
        f.gmms.push_back(std::move(g));

        const auto km = kmeans(class_feats, f.m,
                               derive_seed(seed, "fake-kmeans", static_cast<std::uint64_t>(c)));
        for (int j = 0; j < f.m; ++j) {
            const std::size_t dst = static_cast<std::size_t>(c) * f.m + static_cast<std::size_t>(j);
            for (std::size_t d = 0; d < feat_dim; ++d)
                f.anchors(dst, d) = km.centroids(static_cast<std::size_t>(j), d);
        }
    }

    Rng perm_rng(derive_seed(seed, "fake-perms"));
    f.perms.resize(static_cast<std::size_t>(f.m));
    switch (opt.perm_mode) {
        case PermMode::identity: {
            std::vector<int> id(static_cast<std::size_t>(C));
            std::iota(id.begin(), id.end(), 0);
            for (auto& p : f.perms) p = id;
            break;
        }
        case PermMode::shared: {
            const auto d = sample_derangement(C, perm_rng);
            for (auto& p : f.perms) p = d;
            break;
        }
        case PermMode::distinct:
            for (auto& p : f.perms) p = sample_derangement(C, perm_rng);
            break;
    }
    return f;
}

AnchorId assign_anchor(const FakeModel& f, std::span<const double> features) {
    if (features.size() != f.feature_dim())
        throw InputError("assign_anchor: feature dimension mismatch");
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_row = 0;
    for (std::size_t r = 0; r < f.anchors.rows; ++r) {
        const double d2 = kernels::squared_l2(features.data(), f.anchors.row_ptr(r),
                                              f.feature_dim());
        if (d2 < best) {
            best = d2;
            best_row = r;
        }
    }
    return {static_cast<int>(best_row / static_cast<std::size_t>(f.m)),
            static_cast<int>(best_row % static_cast<std::size_t>(f.m))};
}

namespace {
std::vector<double> fake_logits(const FakeModel& f, const model::MLPClassifier& victim,
                                std::span<const double> x) {
    const auto feats = fake_features(f, victim, x);
    const AnchorId a = assign_anchor(f, {feats.data(), feats.size()});
    const int permuted =
        f.perms[static_cast<std::size_t>(a.slot)][static_cast<std::size_t>(a.class_id)];
    const Gmm& g = f.gmms[static_cast<std::size_t>(permuted)];

    Rng rng(hash_doubles(f.sampling_salt, x.data(), x.size()));
    for (int attempt = 0; attempt < 16; ++attempt) {
        auto z = sample_gmm(g, rng);
        if (model::argmax({z.data(), z.size()}) == permuted) return z;
    }
    // Tail draws kept violating the assigned class: fall back to the
    // heaviest component's mean.
    const std::size_t h = heaviest_component(g);
    return {g.means.row_ptr(h), g.means.row_ptr(h) + g.dim()};
}
}  // namespace

model::ProbVector fake_predict(const FakeModel& f, const model::MLPClassifier& victim,
                               std::span<const double> x, double T) {
    const auto z = fake_logits(f, victim, x);
    return model::softmax({z.data(), z.size()}, T);
}

int fake_class(const FakeModel& f, const model::MLPClassifier& victim,
               std::span<const double> x) {
    const auto z = fake_logits(f, victim, x);
    return model::argmax({z.data(), z.size()});
}

std::string to_json(const FakeModel& f) {
    nlohmann::json j;
    j["n_classes"] = f.n_classes;
    j["m"] = f.m;
    j["phi"] = f.phi == FeatureExtractor::identity ? "identity" : "victim-penultimate";
    j["sampling_salt"] = f.sampling_salt;
    j["em_warning"] = f.em_warning;
    j["feature_dim"] = f.anchors.cols;
    j["anchors"] = f.anchors.a;
    j["perms"] = f.perms;
    auto& gs = j["gmms"] = nlohmann::json::array();
    for (const Gmm& g : f.gmms) {
        nlohmann::json gj;
        gj["weights"] = g.weights;
        gj["means"] = g.means.a;
        gj["vars"] = g.vars.a;
        gj["dim"] = g.means.cols;
        gs.push_back(std::move(gj));
    }
    return j.dump(2) + "\n";
}

FakeModel fake_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("fake model json: ") + e.what());
    }
    FakeModel f;
    f.n_classes = j.at("n_classes").get<int>();
    f.m = j.at("m").get<int>();
    f.phi = j.at("phi").get<std::string>() == "victim-penultimate"
                ? FeatureExtractor::victim_penultimate
                : FeatureExtractor::identity;
    f.sampling_salt = j.at("sampling_salt").get<std::uint64_t>();
    f.em_warning = j.value("em_warning", false);
    const auto feat_dim = j.at("feature_dim").get<std::size_t>();
    f.anchors = Mat(static_cast<std::size_t>(f.n_classes) * static_cast<std::size_t>(f.m),
                    feat_dim);
    f.anchors.a = j.at("anchors").get<std::vector<double>>();
    f.perms = j.at("perms").get<std::vector<std::vector<int>>>();
    for (const auto& gj : j.at("gmms")) {
        Gmm g;
        g.weights = gj.at("weights").get<std::vector<double>>();
        const auto dim = gj.at("dim").get<std::size_t>();
        g.means = Mat(g.weights.size(), dim);
        g.means.a = gj.at("means").get<std::vector<double>>();
        g.vars = Mat(g.weights.size(), dim);
        g.vars.a = gj.at("vars").get<std::vector<double>>();
        f.gmms.push_back(std::move(g));
    }
    return f;
}

void save_fake_model(const FakeModel& f, const std::string& path) {
    io::write_file(path, to_json(f));
}

FakeModel load_fake_model(const std::string& path) {
    return fake_from_json(io::read_file(path));
}

}  // namespace melab::instrument
