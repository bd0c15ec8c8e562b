#include <cstdio>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "melab/errors.hpp"
#include "melab/harness.hpp"
#include "melab/io.hpp"
#include "test_support.hpp"

using namespace melab;
using namespace melab::harness;

namespace {

// A grid small enough for unit tests: 6 classes, tiny nets, short training.
ExperimentSpec tiny_spec() {
    ExperimentSpec s;
    s.name = "tiny";
    s.ind_spec = data::make_ring_mixture(6, 3.0, 0.6, "ring6");
    s.random_spec = data::make_uniform_box(2, -7.0, 7.0, "box7");
    s.surrogate_spec = data::make_surrogate(s.ind_spec, {1.0, 1.0}, 1.1, "ring6-shift");
    s.n_train = 400;
    s.n_test = 400;
    s.victim_archs = {{16, 16}};
    s.victim_cfg.epochs = 20;
    s.victim_cfg.learning_rate = 0.05;
    s.attacker_cfg = s.victim_cfg;
    s.attacker_cfg.epochs = 10;
    s.priors = {0.2};
    s.sources = {attack::OodSource::random};
    s.budgets = {400};
    s.modes = {attack::LabelMode::soft};
    s.instr_settings = {InstrumentSetting{true, 0.0, 5, instrument::PermMode::distinct}};
    s.seeds = {1};
    s.out_dir = "harness_test_out";
    return s;
}

}  // namespace

TEST_CASE("a 1x1 grid with one seed yields exactly one record") {
    const auto out = run_grid(tiny_spec(), 1);
    REQUIRE(out.records.size() == 1);
    const auto& r = out.records[0];
    CHECK(r.error.empty());
    CHECK(r.preset == "tiny");
    CHECK(r.source == "random");
    CHECK(*r.budget == 400);
    CHECK(r.victim_acc.has_value());
    CHECK(r.attack_acc.has_value());
    CHECK(*r.victim_acc > 0.8);
    CHECK_FALSE(r.fpr.has_value());
    CHECK(out.convergence.size() == 10);  // one curve, one point per epoch
}

TEST_CASE("grid completeness: records = valid cells x seeds") {
    auto s = tiny_spec();
    s.priors = {0.0, 0.1, 0.3};
    s.sources = {attack::OodSource::none, attack::OodSource::random};
    s.modes = {attack::LabelMode::soft, attack::LabelMode::ground_truth};
    s.seeds = {1, 2};
    s.attacker_cfg.epochs = 4;
    s.victim_cfg.epochs = 10;
    // none: p in {0.1,0.3} x modes {soft, gt} = 4 cells (p=0 skipped).
    // random: p in {0,0.1,0.3} x soft only (gt needs prior-only) = 3 cells.
    const auto out = run_grid(s, 2);
    CHECK(out.records.size() == 7 * 2);
    std::size_t failures = 0;
    for (const auto& r : out.records)
        if (!r.error.empty()) ++failures;
    CHECK(failures == 0);
}

TEST_CASE("hybrid cells report fpr, hybrid accuracy and fake agreement") {
    auto s = tiny_spec();
    s.instr_settings = {InstrumentSetting{false, 0.9, 5, instrument::PermMode::distinct}};
    const auto out = run_grid(s, 1);
    REQUIRE(out.records.size() == 1);
    const auto& r = out.records[0];
    CHECK(r.error.empty());
    CHECK(r.fpr.has_value());
    CHECK(r.hybrid_acc.has_value());
    CHECK(r.agreement_fake.has_value());
    CHECK(*r.tau == doctest::Approx(0.9));
}

TEST_CASE("table1-style measurement grids produce fpr rows only") {
    auto s = tiny_spec();
    s.kind = ExperimentKind::instrumentation_table;
    s.table_taus = {0.0, 0.9};
    s.table_temps = {1.0, 2.0};
    const auto out = run_grid(s, 1);
    CHECK(out.records.size() == 4);
    for (const auto& r : out.records) {
        CHECK(r.error.empty());
        CHECK(r.fpr.has_value());
        CHECK(r.hybrid_acc.has_value());
        CHECK_FALSE(r.attack_acc.has_value());
        if (*r.tau == 0.0) CHECK(*r.fpr == 0.0);
    }
}

TEST_CASE("records survive a csv round trip and re-emit identically") {
    auto s = tiny_spec();
    s.seeds = {1, 2};
    const auto out = run_grid(s, 2);
    const auto csv = records_to_csv(out.records);
    const auto parsed = records_from_csv(csv);
    CHECK(parsed.size() == out.records.size());
    CHECK(records_to_csv(parsed) == csv);

    const auto empty_csv = records_to_csv({});
    const auto empty = records_from_csv(empty_csv);
    CHECK(empty.empty());
    CHECK(empty_csv.find("preset,") == 0);
}

TEST_CASE("full pipeline emits byte-identical outputs per (spec, seeds)") {
    namespace fs = std::filesystem;
    auto s = tiny_spec();
    s.victim_cfg.epochs = 8;
    s.attacker_cfg.epochs = 4;
    s.out_dir = "harness_det_a";
    const auto f1 = run_experiment(s, 2, EmitFormat::csv);
    s.out_dir = "harness_det_b";
    const auto f2 = run_experiment(s, 1, EmitFormat::csv);  // different worker count
    REQUIRE(f1.size() == f2.size());
    CHECK(io::read_file("harness_det_a/metrics.csv") ==
          io::read_file("harness_det_b/metrics.csv"));
    CHECK(io::read_file("harness_det_a/convergence.csv") ==
          io::read_file("harness_det_b/convergence.csv"));
    CHECK(io::read_file("harness_det_a/manifest.json") ==
          io::read_file("harness_det_b/manifest.json"));
    fs::remove_all("harness_det_a");
    fs::remove_all("harness_det_b");
}

TEST_CASE("errors in one cell leave the rest of the grid standing") {
    auto s = tiny_spec();
    s.priors = {0.001, 0.2};  // prior of 0.4 points rounds to 0 -> train fails
    s.sources = {attack::OodSource::none};
    s.budgets = {400};
    const auto out = run_grid(s, 1);
    REQUIRE(out.records.size() == 2);
    CHECK_FALSE(out.records[0].error.empty());
    CHECK(out.records[1].error.empty());
}

TEST_CASE("confidence histogram: uniform stub mass and bin sums") {
    const auto& t = melab::testing::desk_task();
    // Zero weights give identical logits everywhere: confidence 1/C.
    auto stub = model::init_mlp({2, 10}, model::Activation::relu, 1);
    for (auto& w : stub.weights)
        for (double& v : w.a) v = 0.0;
    const auto h = confidence_histogram(stub, t.test, 12, 1.0);
    CHECK(h.counts[0] == t.test.size());
    for (std::size_t b = 1; b < h.counts.size(); ++b) CHECK(h.counts[b] == 0);

    const auto h1 = confidence_histogram(t.victim, t.test, 1, 2.0);
    CHECK(h1.counts.size() == 1);
    CHECK(h1.counts[0] == t.test.size());

    std::size_t total = 0;
    const auto h20 = confidence_histogram(t.victim, t.test, 20, 2.0);
    for (const auto c : h20.counts) total += c;
    CHECK(total == t.test.size());
    CHECK_THROWS_AS(confidence_histogram(t.victim, t.test, 0, 1.0), InputError);
}

TEST_CASE("presets: structure of the named grids") {
    for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name));
    CHECK_THROWS_AS(preset("nope"), ConfigError);

    const auto q5 = preset("q5");
    CHECK(q5.modes.size() == 3);
    CHECK(q5.priors == std::vector<double>{0.05, 0.3, 0.6});
    CHECK(q5.seeds.size() == 5);

    const auto ab = preset("ablation");
    CHECK(ab.instr_settings.size() == 4);
    std::set<std::string> labels;
    for (const auto& ins : ab.instr_settings) labels.insert(ins.label());
    CHECK(labels.size() == 4);

    const auto f6 = preset("fig6");
    CHECK(f6.kind == ExperimentKind::overlap_sweep);
    CHECK(f6.sweep_configs.size() == 3);

    const auto t1 = preset("table1");
    CHECK(t1.kind == ExperimentKind::instrumentation_table);
    CHECK(t1.table_taus == std::vector<double>{0.0, 0.75, 0.90, 0.95, 0.99});
    CHECK(t1.table_temps == std::vector<double>{1.0, 2.0});

    const auto ms = preset("modelsize");
    CHECK(ms.victim_archs.size() == 3);
}

TEST_CASE("spec json round trip") {
    auto s = preset("q3");
    s.out_dir = "roundtrip";
    const auto text = spec_to_json(s);
    const auto back = spec_from_json(text);
    CHECK(spec_to_json(back) == text);
    CHECK(back.instr_settings.size() == s.instr_settings.size());
    CHECK(back.priors == s.priors);
    CHECK(back.seeds == s.seeds);
}

TEST_CASE("reseed rewrites the repeat list deterministically") {
    auto a = preset("q3");
    auto b = preset("q3");
    reseed(a, 42);
    reseed(b, 42);
    CHECK(a.seeds == b.seeds);
    reseed(b, 43);
    CHECK(a.seeds != b.seeds);
    CHECK(a.seeds.size() == 5);
}
