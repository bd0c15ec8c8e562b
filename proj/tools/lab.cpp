// lab: command-line front end for the model-extraction laboratory.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "melab/attack.hpp"
#include "melab/costing.hpp"
#include "melab/dataset_json.hpp"
#include "melab/errors.hpp"
#include "melab/harness.hpp"
#include "melab/io.hpp"
#include "melab/kernels.hpp"
#include "melab/sampling.hpp"

namespace {

using namespace melab;

std::vector<int> parse_hidden(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

struct GenDataArgs {
    std::string kind = "ring";
    int classes = 10;
    int dim = 2;
    double radius = 3.0;
    double sigma = 0.7;
    double separation = 3.0;
    double box_lo = -8.0, box_hi = 8.0;
    double shift = 1.0, scale = 1.0;
    std::size_t n = 2000;
    std::uint64_t seed = 1;
    std::string out = "dataset";
};

int cmd_gen_data(const GenDataArgs& a) {
    data::DistributionSpec spec;
    data::Dataset ds;
    if (a.kind == "ring") {
        spec = data::make_ring_mixture(a.classes, a.radius, a.sigma);
        ds = data::sample_ind(spec, a.n, a.seed);
    } else if (a.kind == "blobs") {
        spec = data::make_blobs(a.classes, a.dim, a.separation, a.sigma);
        ds = data::sample_ind(spec, a.n, a.seed);
    } else if (a.kind == "box") {
        spec = data::make_uniform_box(a.dim, a.box_lo, a.box_hi);
        ds = data::sample_ood(spec, a.n, a.seed);
    } else if (a.kind == "surrogate") {
        const auto base = data::make_ring_mixture(a.classes, a.radius, a.sigma);
        spec = data::make_surrogate(base, std::vector<double>(2, a.shift), a.scale);
        ds = data::sample_ood(spec, a.n, a.seed);
    } else {
        throw ConfigError("gen-data: unknown kind '" + a.kind + "'");
    }
    data::save_csv(ds, a.out + ".csv");
    data::save_descriptor(spec, a.seed, a.n, a.out + ".json");
    std::cout << "wrote " << a.out << ".csv (" << ds.size() << " samples) and " << a.out
              << ".json\n";
    return 0;
}

struct TrainArgs {
    std::string data;
    std::string hidden = "32,32";
    int classes = 10;
    std::string activation = "relu";
    int epochs = 60;
    int batch = 32;
    double lr = 0.05;
    double momentum = 0.9;
    std::uint64_t seed = 1;
    std::string out = "victim.json";
};

int cmd_train_victim(const TrainArgs& a) {
    const auto ds = data::load_csv(a.data);
    model::TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch;
    cfg.learning_rate = a.lr;
    cfg.momentum = a.momentum;
    cfg.seed = a.seed;
    const auto act =
        a.activation == "tanh" ? model::Activation::tanh : model::Activation::relu;
    const auto m = model::train(ds, parse_hidden(a.hidden), a.classes, cfg, act);
    model::save_model(m, a.out);
    std::cout << "trained victim (" << a.hidden << "), final loss "
              << io::fmt_g6(m.epoch_loss.back()) << ", train accuracy "
              << io::fmt_g6(model::accuracy(m, ds)) << ", saved to " << a.out << "\n";
    return 0;
}

struct InstrumentArgs {
    std::string victim;
    std::string data;
    int anchors = 5;
    std::string perms = "distinct";
    int k_gmm = 3;
    std::size_t per_class = 5000;
    std::string phi = "identity";
    std::string ablation;
    double tau = 0.9;
    double temperature = 2.0;
    std::uint64_t seed = 1;
    std::string out = "fake.json";
};

int cmd_instrument(const InstrumentArgs& a) {
    const auto victim = model::load_model(a.victim);
    const auto train = data::load_csv(a.data);
    instrument::FitFakeOptions opt;
    opt.anchors_per_class = a.anchors;
    opt.k_gmm = a.k_gmm;
    opt.per_class_samples = a.per_class;
    opt.phi = a.phi == "penultimate" ? instrument::FeatureExtractor::victim_penultimate
                                     : instrument::FeatureExtractor::identity;
    if (a.perms == "identity")
        opt.perm_mode = instrument::PermMode::identity;
    else if (a.perms == "shared")
        opt.perm_mode = instrument::PermMode::shared;
    else if (a.perms == "distinct")
        opt.perm_mode = instrument::PermMode::distinct;
    else
        throw ConfigError("instrument: unknown perm mode '" + a.perms + "'");
    if (!a.ablation.empty()) {
        if (a.ablation == "1a0p") {
            opt.anchors_per_class = 1;
            opt.perm_mode = instrument::PermMode::identity;
        } else if (a.ablation == "1a1p") {
            opt.anchors_per_class = 1;
            opt.perm_mode = instrument::PermMode::shared;
        } else if (a.ablation == "5a1p") {
            opt.anchors_per_class = 5;
            opt.perm_mode = instrument::PermMode::shared;
        } else if (a.ablation == "5a5p") {
            opt.anchors_per_class = 5;
            opt.perm_mode = instrument::PermMode::distinct;
        } else {
            throw ConfigError("instrument: unknown ablation '" + a.ablation + "'");
        }
    }
    const auto fake = instrument::fit_fake_model(victim, train, opt, a.seed);
    nlohmann::json j = nlohmann::json::parse(instrument::to_json(fake));
    j["hybrid"] = {{"tau", a.tau}, {"temperature", a.temperature}};
    io::write_file(a.out, j.dump(2) + "\n");
    std::cout << "fitted fake model: " << fake.n_classes << " class GMMs, "
              << fake.anchors.rows << " anchors, " << fake.perms.size() << " permutations"
              << (fake.em_warning ? " (EM hit max iterations for some class)" : "")
              << ", saved to " << a.out << "\n";
    return 0;
}

struct AttackArgs {
    std::string victim;
    std::string train_data;
    std::string test_data;
    std::string fake;
    double tau = 0.9;
    double temperature = 2.0;
    double p = 0.1;
    std::string source = "random";
    std::size_t budget = 0;
    std::string mode = "soft";
    std::string hidden;
    int epochs = 40;
    double lr = 0.05;
    std::uint64_t seed = 1;
    double box_lo = -8.0, box_hi = 8.0;
    std::string desc;  // sidecar of the ind spec, needed for surrogate fill
    double shift = 1.0, scale = 1.1;
    std::string out_dir = "attack_out";
};

int cmd_attack(const AttackArgs& a) {
    namespace fs = std::filesystem;
    const auto victim = model::load_model(a.victim);
    const auto train = data::load_csv(a.train_data);
    const auto test = data::load_csv(a.test_data);
    const auto source = attack::ood_source_from_string(a.source);
    const auto mode = attack::label_mode_from_string(a.mode);

    const auto split = data::split_prior(train, a.p, derive_seed(a.seed, "prior-split"));
    const std::size_t budget = source == attack::OodSource::none
                                   ? split.prior.size()
                                   : (a.budget > 0 ? a.budget : train.size());

    data::DistributionSpec ood_spec =
        data::make_uniform_box(static_cast<int>(train.samples.cols), a.box_lo, a.box_hi);
    if (source == attack::OodSource::surrogate) {
        if (a.desc.empty()) throw ConfigError("attack: surrogate fill needs --desc");
        const auto base = data::dist_from_json(nlohmann::json::parse(io::read_file(a.desc)));
        ood_spec = data::make_surrogate(
            base, std::vector<double>(train.samples.cols, a.shift), a.scale);
    }

    std::optional<instrument::HybridVictim> hybrid;
    std::unique_ptr<attack::QueryTarget> target;
    if (!a.fake.empty()) {
        hybrid.emplace(instrument::make_hybrid(victim, instrument::load_fake_model(a.fake),
                                               a.tau, a.temperature));
        target = std::make_unique<attack::HybridTarget>(*hybrid);
    } else {
        target = std::make_unique<attack::ModelTarget>(victim, 1.0);
    }

    if (source == attack::OodSource::adaptive)
        throw ConfigError("attack: adaptive policy is available through `lab run`");
    attack::QueryPolicy policy{a.p, source, budget, mode};
    const auto qs =
        attack::build_query_set(policy, split.prior, ood_spec, derive_seed(a.seed, "queries"));
    const auto lqs = attack::query_victim(*target, qs, mode);

    model::TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.learning_rate = a.lr;
    cfg.seed = derive_seed(a.seed, "attacker-train");
    const auto hidden = a.hidden.empty()
                            ? std::vector<int>(victim.layer_sizes.begin() + 1,
                                               victim.layer_sizes.end() - 1)
                            : parse_hidden(a.hidden);
    model::TrainTrace trace;
    const auto attacker =
        attack::train_attacker(lqs, hidden, cfg, victim.activation, &test, &trace);

    attack::FakeRoutedSet fake_routed;
    if (hybrid) {
        const auto eval_ood =
            data::sample_ood(ood_spec, 1000, derive_seed(a.seed, "fake-eval"));
        fake_routed = attack::collect_fake_routed(*hybrid, eval_ood.samples);
    }
    const auto result = attack::evaluate_attack(attacker, victim, test,
                                                hybrid ? &fake_routed : nullptr,
                                                &trace.eval_acc);

    harness::RunRecord rec;
    rec.preset = "cli-attack";
    rec.seed = a.seed;
    rec.arch = a.hidden.empty() ? "victim" : a.hidden;
    rec.instrumentation = hybrid ? "hybrid" : "real";
    if (hybrid) rec.tau = a.tau;
    rec.temperature = hybrid ? a.temperature : 1.0;
    rec.prior_fraction = a.p;
    rec.source = a.source;
    rec.budget = budget;
    rec.label_mode = a.mode;
    rec.victim_acc = result.victim_accuracy;
    rec.attack_acc = result.attack_accuracy;
    rec.gap = result.gap;
    rec.agreement_real = result.agreement_real;
    rec.agreement_fake = result.agreement_fake;
    if (hybrid) {
        rec.fpr = instrument::measure_fpr(*hybrid, test);
        rec.hybrid_acc = instrument::measure_hybrid_accuracy(*hybrid, test);
    }

    fs::create_directories(a.out_dir);
    const auto metrics_path = (fs::path(a.out_dir) / "metrics.csv").string();
    std::vector<harness::RunRecord> rows;
    if (fs::exists(metrics_path))
        rows = harness::records_from_csv(io::read_file(metrics_path));
    rows.push_back(rec);
    io::write_file(metrics_path, harness::records_to_csv(rows));

    std::vector<harness::ConvergencePoint> conv;
    for (std::size_t e = 0; e < trace.eval_acc.size(); ++e)
        conv.push_back({static_cast<int>(e + 1), trace.eval_acc[e], a.mode, a.p});
    io::write_file((fs::path(a.out_dir) / "convergence.csv").string(),
                   harness::convergence_to_csv(conv));

    std::cout << "victim accuracy  " << io::fmt_g6(result.victim_accuracy) << "\n"
              << "attack accuracy  " << io::fmt_g6(result.attack_accuracy) << "\n"
              << "gap              " << io::fmt_g6(result.gap) << "\n"
              << "agreement (real) " << io::fmt_g6(result.agreement_real) << "\n";
    if (result.agreement_fake)
        std::cout << "agreement (fake) " << io::fmt_g6(*result.agreement_fake) << "\n";
    std::cout << "rows appended to " << metrics_path << "\n";
    return 0;
}

struct CostArgs {
    std::string config;
    double defender_n = 60000, defender_pl = 0.04, defender_cc = 0.0;
    double attacker_n = 3000, attacker_pl = 0.8, attacker_cc = 0.0;
    std::string format = "table";
};

int cmd_cost(const CostArgs& a) {
    costing::PartyCost defender{static_cast<std::int64_t>(a.defender_n),
                                Decimal::from_double(a.defender_pl),
                                Decimal::from_double(a.defender_cc)};
    costing::PartyCost attacker{static_cast<std::int64_t>(a.attacker_n),
                                Decimal::from_double(a.attacker_pl),
                                Decimal::from_double(a.attacker_cc)};
    if (!a.config.empty()) {
        const auto j = nlohmann::json::parse(io::read_file(a.config));
        auto load = [](const nlohmann::json& pj) {
            costing::PartyCost pc;
            pc.n = pj.at("n").get<std::int64_t>();
            auto dec = [](const nlohmann::json& v) {
                return v.is_string() ? Decimal::parse(v.get<std::string>())
                                     : Decimal::from_double(v.get<double>());
            };
            pc.per_label = dec(pj.at("per_label"));
            pc.collection = dec(pj.at("collection"));
            return pc;
        };
        defender = load(j.at("defender"));
        attacker = load(j.at("attacker"));
    }

    const auto cd = costing::total_cost(defender);
    const auto ca = costing::total_cost(attacker);
    const auto verdict = costing::is_cost_effective(defender, attacker);
    const auto be = costing::break_even_label_price(cd, attacker.n, attacker.collection);

    if (a.format == "json") {
        nlohmann::json j;
        j["defender_total"] = cd.str();
        j["attacker_total"] = ca.str();
        j["cost_effective"] = verdict.cost_effective;
        j["margin"] = verdict.margin.str();
        j["break_even_label_price"] = be.achievable ? be.price.str() : "never";
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "party      n          per_label   collection  total\n"
                  << "defender   " << defender.n << "   " << defender.per_label.str() << "   "
                  << defender.collection.str() << "   " << cd.str() << "\n"
                  << "attacker   " << attacker.n << "   " << attacker.per_label.str() << "   "
                  << attacker.collection.str() << "   " << ca.str() << "\n"
                  << "cost-effective: " << (verdict.cost_effective ? "yes" : "no")
                  << " (margin " << verdict.margin.str() << ")\n"
                  << "break-even per-label price at n_a=" << attacker.n << ": "
                  << (be.achievable ? be.price.str() : "never cost-effective") << "\n";
    }
    return 0;
}

struct SweepArgs {
    double mu_lo = 0.0, mu_hi = 3.0, sigma_lo = 0.0, sigma_hi = 5.0;
    std::size_t pairs = 300;
    std::uint64_t seed = 1;
    std::string out = "sweep.csv";
};

int cmd_sampling_sweep(const SweepArgs& a) {
    const auto rows = sampling::sweep_overlap({a.mu_lo, a.mu_hi}, {a.sigma_lo, a.sigma_hi},
                                              a.pairs, a.seed);
    std::ostringstream os;
    os << "w2,overlap,overlap_mc\n";
    for (const auto& r : rows)
        os << io::fmt_g6(r.w2) << "," << io::fmt_g6(r.overlap) << ","
           << io::fmt_g6(r.overlap_mc) << "\n";
    io::write_file(a.out, os.str());
    std::cout << "wrote " << rows.size() << " rows to " << a.out << "\n";
    return 0;
}

struct VolumeArgs {
    std::string victim;
    std::string thresholds = "90";
    std::string temps = "1,2";
    std::size_t n = 20000;
    double box_lo = -8.0, box_hi = 8.0;
    std::string test_data;
    std::uint64_t seed = 1;
    std::string out = "volume.csv";
};

int cmd_sampling_volume(const VolumeArgs& a) {
    const auto victim = model::load_model(a.victim);
    data::Dataset test;
    if (!a.test_data.empty()) test = data::load_csv(a.test_data);
    const auto box = data::make_uniform_box(victim.input_dim(), a.box_lo, a.box_hi);

    std::vector<double> thresholds;
    {
        std::stringstream ss(a.thresholds);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) thresholds.push_back(sampling::parse_threshold(tok));
    }
    std::ostringstream os;
    os << "threshold,T,fraction_random,fraction_ind_test\n";
    for (double T : parse_doubles(a.temps))
        for (double thr : thresholds) {
            const auto est = sampling::estimate_ind_volume(
                victim, a.n, thr, T, box, a.seed, test.size() ? &test : nullptr);
            os << io::fmt_g6(thr) << "," << io::fmt_g6(T) << ","
               << io::fmt_g6(est.fraction_random) << "," << io::fmt_g6(est.fraction_ind_test)
               << "\n";
        }
    io::write_file(a.out, os.str());
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

struct RunArgs {
    std::string preset;
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out = "";
    int workers = 1;
    std::string format = "csv";
    bool dump_config = false;
};

int cmd_run(const RunArgs& a) {
    harness::ExperimentSpec spec;
    if (!a.config.empty()) {
        spec = harness::spec_from_json(io::read_file(a.config));
    } else if (!a.preset.empty()) {
        spec = harness::preset(a.preset);
    } else {
        throw ConfigError("run: either --preset or --config is required");
    }
    if (a.seed_set) harness::reseed(spec, a.seed);
    if (!a.out.empty()) spec.out_dir = a.out;
    if (const char* env = std::getenv("LAB_OUT_DIR"); env && *env) spec.out_dir = env;

    if (a.dump_config) {
        std::cout << harness::spec_to_json(spec);
        return 0;
    }
    const auto format =
        a.format == "json" ? harness::EmitFormat::json : harness::EmitFormat::csv;
    const auto files = harness::run_experiment(spec, a.workers, format);
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"melab: desk-scale model-extraction laboratory"};
    app.require_subcommand(1);

    GenDataArgs gen;
    auto* sc_gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
    sc_gen->add_option("--kind", gen.kind, "ring|blobs|box|surrogate");
    sc_gen->add_option("--classes", gen.classes);
    sc_gen->add_option("--dim", gen.dim);
    sc_gen->add_option("--radius", gen.radius);
    sc_gen->add_option("--sigma", gen.sigma);
    sc_gen->add_option("--separation", gen.separation);
    sc_gen->add_option("--box-lo", gen.box_lo);
    sc_gen->add_option("--box-hi", gen.box_hi);
    sc_gen->add_option("--shift", gen.shift);
    sc_gen->add_option("--scale", gen.scale);
    sc_gen->add_option("--n", gen.n);
    sc_gen->add_option("--seed", gen.seed);
    sc_gen->add_option("--out", gen.out, "output basename (.csv/.json)");

    TrainArgs tr;
    auto* sc_train = app.add_subcommand("train-victim", "train a victim classifier");
    sc_train->add_option("--data", tr.data)->required();
    sc_train->add_option("--hidden", tr.hidden, "comma-separated hidden sizes");
    sc_train->add_option("--classes", tr.classes);
    sc_train->add_option("--activation", tr.activation, "relu|tanh");
    sc_train->add_option("--epochs", tr.epochs);
    sc_train->add_option("--batch", tr.batch);
    sc_train->add_option("--lr", tr.lr);
    sc_train->add_option("--momentum", tr.momentum);
    sc_train->add_option("--seed", tr.seed);
    sc_train->add_option("--out", tr.out);

    InstrumentArgs ins;
    auto* sc_ins = app.add_subcommand("instrument", "fit the fake model for a hybrid victim");
    sc_ins->add_option("--victim", ins.victim)->required();
    sc_ins->add_option("--data", ins.data)->required();
    sc_ins->add_option("--anchors", ins.anchors, "anchor points per class (m)");
    sc_ins->add_option("--perms", ins.perms, "identity|shared|distinct");
    sc_ins->add_option("--k-gmm", ins.k_gmm);
    sc_ins->add_option("--per-class", ins.per_class, "samples per class (S)");
    sc_ins->add_option("--phi", ins.phi, "identity|penultimate");
    sc_ins->add_option("--ablation", ins.ablation, "1a0p|1a1p|5a1p|5a5p");
    sc_ins->add_option("--tau", ins.tau);
    sc_ins->add_option("--temperature", ins.temperature);
    sc_ins->add_option("--seed", ins.seed);
    sc_ins->add_option("--out", ins.out);

    AttackArgs atk;
    auto* sc_atk = app.add_subcommand("attack", "run one extraction attack");
    sc_atk->add_option("--victim", atk.victim)->required();
    sc_atk->add_option("--data", atk.train_data, "victim training data csv")->required();
    sc_atk->add_option("--test", atk.test_data, "labeled ind test csv")->required();
    sc_atk->add_option("--fake", atk.fake, "fake model json (enables the hybrid)");
    sc_atk->add_option("--tau", atk.tau);
    sc_atk->add_option("--temperature", atk.temperature);
    sc_atk->add_option("--p", atk.p, "prior fraction");
    sc_atk->add_option("--source", atk.source, "none|random|surrogate");
    sc_atk->add_option("--budget", atk.budget, "query budget (default |train|)");
    sc_atk->add_option("--mode", atk.mode, "soft|label-only|ground-truth");
    sc_atk->add_option("--hidden", atk.hidden);
    sc_atk->add_option("--epochs", atk.epochs);
    sc_atk->add_option("--lr", atk.lr);
    sc_atk->add_option("--seed", atk.seed);
    sc_atk->add_option("--box-lo", atk.box_lo);
    sc_atk->add_option("--box-hi", atk.box_hi);
    sc_atk->add_option("--desc", atk.desc, "ind descriptor json for surrogate fill");
    sc_atk->add_option("--shift", atk.shift);
    sc_atk->add_option("--scale", atk.scale);
    sc_atk->add_option("--out", atk.out_dir);

    CostArgs cost;
    auto* sc_cost = app.add_subcommand("cost", "extraction economics report");
    sc_cost->add_option("--config", cost.config, "json with defender/attacker parties");
    sc_cost->add_option("--defender-n", cost.defender_n);
    sc_cost->add_option("--defender-pl", cost.defender_pl);
    sc_cost->add_option("--defender-cc", cost.defender_cc);
    sc_cost->add_option("--attacker-n", cost.attacker_n);
    sc_cost->add_option("--attacker-pl", cost.attacker_pl);
    sc_cost->add_option("--attacker-cc", cost.attacker_cc);
    sc_cost->add_option("--format", cost.format, "table|json");

    auto* sc_sampling = app.add_subcommand("sampling", "appendix-style sampling estimators");
    sc_sampling->require_subcommand(1);
    SweepArgs sweep;
    auto* sc_sweep = sc_sampling->add_subcommand("sweep", "overlap vs wasserstein sweep");
    sc_sweep->add_option("--mu-lo", sweep.mu_lo);
    sc_sweep->add_option("--mu-hi", sweep.mu_hi);
    sc_sweep->add_option("--sigma-lo", sweep.sigma_lo);
    sc_sweep->add_option("--sigma-hi", sweep.sigma_hi);
    sc_sweep->add_option("--pairs", sweep.pairs);
    sc_sweep->add_option("--seed", sweep.seed);
    sc_sweep->add_option("--out", sweep.out);
    VolumeArgs vol;
    auto* sc_vol = sc_sampling->add_subcommand("volume", "ind-volume estimation");
    sc_vol->add_option("--victim", vol.victim)->required();
    sc_vol->add_option("--thresholds", vol.thresholds, "comma list; percent style ok");
    sc_vol->add_option("--temps", vol.temps);
    sc_vol->add_option("--n", vol.n);
    sc_vol->add_option("--box-lo", vol.box_lo);
    sc_vol->add_option("--box-hi", vol.box_hi);
    sc_vol->add_option("--test", vol.test_data);
    sc_vol->add_option("--seed", vol.seed);
    sc_vol->add_option("--out", vol.out);

    RunArgs run;
    auto* sc_run = app.add_subcommand("run", "run a preset or config experiment grid");
    sc_run->add_option("--preset", run.preset, "q1|q2|q3|q4|q5|table1|fig6|fig7|ablation|modelsize");
    sc_run->add_option("--config", run.config, "experiment spec json");
    sc_run->add_option("--seed", run.seed)->each([&run](const std::string&) {
        run.seed_set = true;
    });
    sc_run->add_option("--out", run.out);
    sc_run->add_option("--workers", run.workers);
    sc_run->add_option("--format", run.format, "csv|json");
    sc_run->add_flag("--dump-config", run.dump_config, "print the spec json and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sc_gen->parsed()) return cmd_gen_data(gen);
        if (sc_train->parsed()) return cmd_train_victim(tr);
        if (sc_ins->parsed()) return cmd_instrument(ins);
        if (sc_atk->parsed()) return cmd_attack(atk);
        if (sc_cost->parsed()) return cmd_cost(cost);
        if (sc_sampling->parsed()) {
            if (sc_sweep->parsed()) return cmd_sampling_sweep(sweep);
            if (sc_vol->parsed()) return cmd_sampling_volume(vol);
        }
        if (sc_run->parsed()) return cmd_run(run);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
