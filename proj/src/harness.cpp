#include "melab/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "melab/bandit.hpp"
#include "melab/dataset_json.hpp"
#include "melab/errors.hpp"
#include "melab/io.hpp"
#include "melab/rng.hpp"

namespace melab::harness {

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::attack_grid: return "attack-grid";
        case ExperimentKind::instrumentation_table: return "instrumentation-table";
        case ExperimentKind::overlap_sweep: return "overlap-sweep";
        case ExperimentKind::volume_estimate: return "volume-estimate";
    }
    return "?";
}

namespace {

ExperimentKind kind_from_string(const std::string& s) {
    if (s == "attack-grid") return ExperimentKind::attack_grid;
    if (s == "instrumentation-table") return ExperimentKind::instrumentation_table;
    if (s == "overlap-sweep") return ExperimentKind::overlap_sweep;
    if (s == "volume-estimate") return ExperimentKind::volume_estimate;
    throw ConfigError("unknown experiment kind: " + s);
}

std::string perm_mode_name(instrument::PermMode p) {
    switch (p) {
        case instrument::PermMode::identity: return "identity";
        case instrument::PermMode::shared: return "shared";
        case instrument::PermMode::distinct: return "distinct";
    }
    return "?";
}

instrument::PermMode perm_mode_from_string(const std::string& s) {
    if (s == "identity") return instrument::PermMode::identity;
    if (s == "shared") return instrument::PermMode::shared;
    if (s == "distinct") return instrument::PermMode::distinct;
    throw ConfigError("unknown perm mode: " + s);
}

std::string arch_label(const std::vector<int>& hidden) {
    if (hidden.empty()) return "linear";
    std::string s;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(hidden[i]);
    }
    return s;
}

}  // namespace

std::string InstrumentSetting::label() const {
    if (real_model) return "real";
    std::ostringstream os;
    os << "tau" << io::fmt_g6(tau) << "-m" << anchors_m << "-" << perm_mode_name(perm_mode);
    return os.str();
}

void ExperimentSpec::validate() const {
    if (seeds.empty()) throw ConfigError("experiment: seeds must be non-empty");
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t j = i + 1; j < seeds.size(); ++j)
            if (seeds[i] == seeds[j]) throw ConfigError("experiment: duplicate seeds");
    if (kind == ExperimentKind::attack_grid) {
        if (victim_archs.empty()) throw ConfigError("experiment: no victim architectures");
        if (priors.empty() || sources.empty() || modes.empty() || budgets.empty())
            throw ConfigError("experiment: empty policy grid");
        if (instr_settings.empty()) throw ConfigError("experiment: no instrumentation settings");
        for (double p : priors)
            if (p < 0.0 || p > 1.0) throw ConfigError("experiment: prior fraction outside [0,1]");
    }
    if (kind == ExperimentKind::instrumentation_table &&
        (table_taus.empty() || table_temps.empty()))
        throw ConfigError("experiment: empty table grid");
    if (kind == ExperimentKind::overlap_sweep && sweep_configs.empty())
        throw ConfigError("experiment: no sweep configurations");
    if (kind == ExperimentKind::volume_estimate &&
        (volume_thresholds.empty() || volume_temps.empty()))
        throw ConfigError("experiment: empty volume grid");
}

namespace {

// ---------------------------------------------------------------------------
// Grid expansion

struct Cell {
    std::size_t arch = 0;
    std::size_t instr = 0;
    double tau = 0.0;          // instrumentation_table only
    double temperature = 1.0;  // instrumentation_table only
    std::size_t p_idx = 0;
    std::size_t source_idx = 0;
    std::size_t budget_idx = 0;
    std::size_t mode_idx = 0;
};

std::vector<Cell> expand_cells(const ExperimentSpec& spec) {
    std::vector<Cell> cells;
    if (spec.kind == ExperimentKind::instrumentation_table) {
        for (double tau : spec.table_taus)
            for (double temp : spec.table_temps) {
                Cell c;
                c.tau = tau;
                c.temperature = temp;
                cells.push_back(c);
            }
        return cells;
    }
    for (std::size_t a = 0; a < spec.victim_archs.size(); ++a)
        for (std::size_t ins = 0; ins < spec.instr_settings.size(); ++ins)
            for (std::size_t p = 0; p < spec.priors.size(); ++p)
                for (std::size_t s = 0; s < spec.sources.size(); ++s)
                    for (std::size_t b = 0; b < spec.budgets.size(); ++b)
                        for (std::size_t m = 0; m < spec.modes.size(); ++m) {
                            const auto source = spec.sources[s];
                            const auto mode = spec.modes[m];
                            if (source == attack::OodSource::none && spec.priors[p] == 0.0)
                                continue;  // no queries at all
                            if (source == attack::OodSource::none && b > 0)
                                continue;  // budget collapses to |prior|
                            if (mode == attack::LabelMode::ground_truth &&
                                source != attack::OodSource::none)
                                continue;  // real labels exist only for prior data
                            cells.push_back(Cell{a, ins, 0.0, 1.0, p, s, b, m});
                        }
    return cells;
}

// ---------------------------------------------------------------------------
// Per-seed shared state

struct SeedContext {
    std::uint64_t seed = 0;
    data::Dataset train;
    data::Dataset test;
    std::vector<model::MLPClassifier> victims;           // per arch
    std::vector<data::PriorSplit> prior_splits;          // per prior index
    std::map<std::string, instrument::FakeModel> fakes;  // key: arch + fake layout
};

std::string fake_key(std::size_t arch_idx, int m, instrument::PermMode pm) {
    return std::to_string(arch_idx) + "-m" + std::to_string(m) + "-" + perm_mode_name(pm);
}

SeedContext build_context(const ExperimentSpec& spec, std::uint64_t seed) {
    SeedContext ctx;
    ctx.seed = seed;
    ctx.train = data::sample_ind(spec.ind_spec, spec.n_train, derive_seed(seed, "data-train"));
    ctx.test = data::sample_ind(spec.ind_spec, spec.n_test, derive_seed(seed, "data-test"));

    const auto* mix = std::get_if<data::GaussianMixtureSpec>(&spec.ind_spec.params);
    if (!mix) throw ConfigError("experiment: ind spec must be a gaussian mixture");
    const int C = mix->n_classes;

    for (std::size_t a = 0; a < spec.victim_archs.size(); ++a) {
        model::TrainConfig cfg = spec.victim_cfg;
        cfg.seed = derive_seed(seed, "victim-train", a);
        ctx.victims.push_back(
            model::train(ctx.train, spec.victim_archs[a], C, cfg, spec.activation));
    }

    for (std::size_t p = 0; p < spec.priors.size(); ++p)
        ctx.prior_splits.push_back(
            data::split_prior(ctx.train, spec.priors[p], derive_seed(seed, "prior-split", p)));

    instrument::FitFakeOptions base;
    base.per_class_samples = spec.per_class_samples;
    base.k_gmm = spec.k_gmm;
    auto ensure_fake = [&](std::size_t arch_idx, int m, instrument::PermMode pm) {
        const std::string key = fake_key(arch_idx, m, pm);
        if (ctx.fakes.count(key)) return;
        instrument::FitFakeOptions opt = base;
        opt.anchors_per_class = m;
        opt.perm_mode = pm;
        const std::uint64_t fseed = derive_seed(derive_seed(seed, "fake-fit", arch_idx), key);
        ctx.fakes.emplace(key, instrument::fit_fake_model(ctx.victims[arch_idx], ctx.train,
                                                          opt, fseed));
    };
    if (spec.kind == ExperimentKind::instrumentation_table) {
        ensure_fake(0, 5, instrument::PermMode::distinct);
    } else {
        for (std::size_t a = 0; a < spec.victim_archs.size(); ++a)
            for (const auto& ins : spec.instr_settings)
                if (!ins.real_model) ensure_fake(a, ins.anchors_m, ins.perm_mode);
    }
    return ctx;
}

// ---------------------------------------------------------------------------
// Cell execution

struct CellResult {
    RunRecord record;
    std::vector<ConvergencePoint> convergence;
};

void append_response(attack::LabeledQuerySet& lqs, std::span<const double> x,
                     const instrument::HybridResponse& resp, attack::LabelMode mode,
                     attack::SourceTag tag) {
    lqs.queries.push_row(x);
    lqs.tags.push_back(tag);
    lqs.routes.push_back(resp.route);
    std::vector<double> row(lqs.responses.cols, 0.0);
    if (mode == attack::LabelMode::soft) {
        row.assign(resp.probs.begin(), resp.probs.end());
    } else {
        row[static_cast<std::size_t>(
            model::argmax({resp.probs.data(), resp.probs.size()}))] = 1.0;
    }
    lqs.responses.push_row({row.data(), row.size()});
}

attack::LabeledQuerySet adaptive_query(const ExperimentSpec& spec,
                                       const attack::QueryTarget& target,
                                       const data::Dataset& prior, attack::LabelMode mode,
                                       std::size_t budget, std::uint64_t cell_seed) {
    if (mode == attack::LabelMode::ground_truth)
        throw ConfigError("adaptive fill cannot use ground-truth labels");
    const std::size_t fill = budget > prior.size() ? budget - prior.size() : 0;
    const std::size_t pool_n = std::max(spec.bandit_pool, fill);
    const auto pool =
        data::sample_ood(spec.random_spec, pool_n, derive_seed(cell_seed, "bandit-pool"));

    attack::LabeledQuerySet lqs;
    lqs.queries = Mat(0, pool.samples.cols);
    lqs.responses = Mat(0, static_cast<std::size_t>(target.original_model().n_classes()));
    for (std::size_t i = 0; i < prior.size(); ++i) {
        const auto x = prior.samples.row(i);
        append_response(lqs, x, target.respond(x), mode, attack::SourceTag::prior);
    }

    auto state = attack::make_bandit(pool.samples, spec.bandit_arms, spec.bandit_epsilon,
                                     derive_seed(cell_seed, "bandit-arms"));
    Rng sel_rng(derive_seed(cell_seed, "bandit-select"));
    while (lqs.size() < budget && state.remaining_total() > 0) {
        const std::size_t want = std::min(spec.bandit_batch, budget - lqs.size());
        const auto picked = attack::adaptive_select(state, want, sel_rng);
        for (const std::size_t idx : picked) {
            const auto x = state.pool.row(idx);
            const auto resp = target.respond(x);
            attack::update_reward(state, idx, attack::response_reward(resp.probs));
            append_response(lqs, x, resp, mode, attack::SourceTag::ood);
        }
    }
    return lqs;
}

CellResult run_attack_cell(const ExperimentSpec& spec, const SeedContext& ctx, const Cell& cell,
                           std::size_t cell_index) {
    CellResult out;
    RunRecord& rec = out.record;
    const auto& instr = spec.instr_settings[cell.instr];
    const auto source = spec.sources[cell.source_idx];
    const auto mode = spec.modes[cell.mode_idx];
    const double p = spec.priors[cell.p_idx];

    rec.preset = spec.name;
    rec.seed = ctx.seed;
    rec.arch = arch_label(spec.victim_archs[cell.arch]);
    rec.instrumentation = instr.label();
    rec.temperature = spec.temperature;
    if (!instr.real_model) rec.tau = instr.tau;
    rec.prior_fraction = p;
    rec.source = attack::to_string(source);
    rec.label_mode = attack::to_string(mode);

    const model::MLPClassifier& victim = ctx.victims[cell.arch];
    const data::Dataset& prior = ctx.prior_splits[cell.p_idx].prior;
    const std::size_t budget =
        source == attack::OodSource::none ? prior.size() : spec.budgets[cell.budget_idx];
    rec.budget = budget;

    // Every arm answers at the spec temperature so that the real-model and
    // instrumented cells differ only in the routing.
    std::optional<instrument::HybridVictim> hybrid;
    std::unique_ptr<attack::QueryTarget> target;
    if (instr.real_model) {
        target = std::make_unique<attack::ModelTarget>(victim, spec.temperature);
    } else {
        hybrid.emplace(instrument::make_hybrid(
            victim, ctx.fakes.at(fake_key(cell.arch, instr.anchors_m, instr.perm_mode)),
            instr.tau, spec.temperature));
        target = std::make_unique<attack::HybridTarget>(*hybrid);
    }

    const std::uint64_t cell_seed = derive_seed(ctx.seed, "cell", cell_index);
    attack::LabeledQuerySet lqs;
    if (source == attack::OodSource::adaptive) {
        lqs = adaptive_query(spec, *target, prior, mode, budget, cell_seed);
    } else {
        attack::QueryPolicy policy{p, source, budget, mode};
        const auto& ood_spec = source == attack::OodSource::surrogate ? spec.surrogate_spec
                                                                      : spec.random_spec;
        const auto qs = attack::build_query_set(policy, prior, ood_spec,
                                                derive_seed(cell_seed, "queries"));
        lqs = attack::query_victim(*target, qs, mode);
    }

    model::TrainConfig acfg = spec.attacker_cfg;
    acfg.seed = derive_seed(cell_seed, "attacker-train");
    const auto& hidden =
        spec.attacker_hidden.empty() ? spec.victim_archs[cell.arch] : spec.attacker_hidden;
    model::TrainTrace trace;
    const auto attacker =
        attack::train_attacker(lqs, hidden, acfg, spec.activation, &ctx.test, &trace);

    attack::FakeRoutedSet fake_routed;
    if (hybrid) {
        // Held-out queries from the same source the attacker filled with.
        const auto& eval_spec = source == attack::OodSource::surrogate ? spec.surrogate_spec
                                                                       : spec.random_spec;
        const auto eval_ood =
            data::sample_ood(eval_spec, 1000, derive_seed(cell_seed, "fake-eval"));
        fake_routed = attack::collect_fake_routed(*hybrid, eval_ood.samples);
    }
    const auto result = attack::evaluate_attack(attacker, victim, ctx.test,
                                                hybrid ? &fake_routed : nullptr,
                                                &trace.eval_acc);
    rec.victim_acc = result.victim_accuracy;
    rec.attack_acc = result.attack_accuracy;
    rec.gap = result.gap;
    rec.agreement_real = result.agreement_real;
    rec.agreement_fake = result.agreement_fake;
    if (hybrid) {
        rec.fpr = instrument::measure_fpr(*hybrid, ctx.test);
        rec.hybrid_acc = instrument::measure_hybrid_accuracy(*hybrid, ctx.test);
    }

    for (std::size_t e = 0; e < trace.eval_acc.size(); ++e)
        out.convergence.push_back(
            ConvergencePoint{static_cast<int>(e + 1), trace.eval_acc[e], rec.label_mode, p});
    return out;
}

CellResult run_table_cell(const ExperimentSpec& spec, const SeedContext& ctx, const Cell& cell) {
    CellResult out;
    RunRecord& rec = out.record;
    rec.preset = spec.name;
    rec.seed = ctx.seed;
    rec.arch = arch_label(spec.victim_archs[0]);
    rec.instrumentation = "tau-sweep";
    rec.tau = cell.tau;
    rec.temperature = cell.temperature;

    const auto hybrid = instrument::make_hybrid(
        ctx.victims[0], ctx.fakes.at(fake_key(0, 5, instrument::PermMode::distinct)), cell.tau,
        cell.temperature);
    rec.victim_acc = model::accuracy(ctx.victims[0], ctx.test);
    rec.fpr = instrument::measure_fpr(hybrid, ctx.test);
    rec.hybrid_acc = instrument::measure_hybrid_accuracy(hybrid, ctx.test);
    return out;
}

}  // namespace

GridOutput run_grid(const ExperimentSpec& spec, int workers) {
    spec.validate();
    if (spec.kind != ExperimentKind::attack_grid &&
        spec.kind != ExperimentKind::instrumentation_table)
        throw ConfigError("run_grid handles attack-grid and instrumentation-table specs");
    const auto cells = expand_cells(spec);
    const std::size_t n_tasks = cells.size() * spec.seeds.size();
    const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(n_tasks)));

    // Phase 1: shared per-seed state (datasets, victims, fake models).
    std::vector<SeedContext> contexts(spec.seeds.size());
    {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::vector<std::string> errors(spec.seeds.size());
        for (int w = 0; w < std::min<int>(n_workers, static_cast<int>(spec.seeds.size())); ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < spec.seeds.size();
                     i = next.fetch_add(1)) {
                    try {
                        contexts[i] = build_context(spec, spec.seeds[i]);
                    } catch (const std::exception& e) {
                        errors[i] = e.what();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors)
            if (!e.empty()) throw ConfigError("experiment setup failed: " + e);
    }

    // Phase 2: cells x seeds, order-independent.
    std::vector<CellResult> results(n_tasks);
    {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) {
                    const std::size_t cell_idx = t / spec.seeds.size();
                    const std::size_t seed_idx = t % spec.seeds.size();
                    const auto started = std::chrono::steady_clock::now();
                    try {
                        results[t] = spec.kind == ExperimentKind::attack_grid
                                         ? run_attack_cell(spec, contexts[seed_idx],
                                                           cells[cell_idx], cell_idx)
                                         : run_table_cell(spec, contexts[seed_idx],
                                                          cells[cell_idx]);
                    } catch (const std::exception& e) {
                        results[t] = CellResult{};
                        results[t].record.preset = spec.name;
                        results[t].record.seed = spec.seeds[seed_idx];
                        results[t].record.error = e.what();
                    }
                    results[t].record.wall_ms =
                        std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - started)
                            .count();
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    GridOutput out;
    out.records.reserve(n_tasks);
    for (auto& r : results) {
        out.records.push_back(std::move(r.record));
        out.convergence.insert(out.convergence.end(), r.convergence.begin(),
                               r.convergence.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string opt_cell(const std::optional<double>& v) {
    return v ? io::fmt_g6(*v) : std::string{};
}

std::optional<double> parse_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

constexpr const char* kCsvHeader =
    "preset,seed,arch,instrumentation,tau,temperature,p,source,budget,label_mode,"
    "victim_acc,attack_acc,gap,agreement_real,agreement_fake,fpr,hybrid_acc,error";

}  // namespace

namespace {
std::string csv_safe(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}
}  // namespace

std::string records_to_csv(const std::vector<RunRecord>& records) {
    std::ostringstream out;
    out << kCsvHeader << "\n";
    for (const auto& r : records) {
        out << r.preset << "," << r.seed << "," << r.arch << "," << r.instrumentation << ","
            << opt_cell(r.tau) << "," << io::fmt_g6(r.temperature) << ","
            << opt_cell(r.prior_fraction) << "," << r.source << ","
            << (r.budget ? std::to_string(*r.budget) : std::string{}) << "," << r.label_mode
            << "," << opt_cell(r.victim_acc) << "," << opt_cell(r.attack_acc) << ","
            << opt_cell(r.gap) << "," << opt_cell(r.agreement_real) << ","
            << opt_cell(r.agreement_fake) << "," << opt_cell(r.fpr) << ","
            << opt_cell(r.hybrid_acc) << "," << csv_safe(r.error) << "\n";
    }
    return out.str();
}

std::vector<RunRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("records csv: empty file");
    std::vector<RunRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = io::split_csv_line(line);
        if (c.size() != 18) throw IoError("records csv: ragged row");
        RunRecord r;
        r.preset = c[0];
        r.seed = std::stoull(c[1]);
        r.arch = c[2];
        r.instrumentation = c[3];
        r.tau = parse_opt(c[4]);
        r.temperature = std::stod(c[5]);
        r.prior_fraction = parse_opt(c[6]);
        r.source = c[7];
        if (!c[8].empty()) r.budget = std::stoull(c[8]);
        r.label_mode = c[9];
        r.victim_acc = parse_opt(c[10]);
        r.attack_acc = parse_opt(c[11]);
        r.gap = parse_opt(c[12]);
        r.agreement_real = parse_opt(c[13]);
        r.agreement_fake = parse_opt(c[14]);
        r.fpr = parse_opt(c[15]);
        r.hybrid_acc = parse_opt(c[16]);
        r.error = c[17];
        out.push_back(std::move(r));
    }
    return out;
}

namespace {
void put_opt(nlohmann::json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = std::stod(io::fmt_g6(*v));
}
}  // namespace

std::string records_to_json(const std::vector<RunRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json j;
        j["preset"] = r.preset;
        j["seed"] = r.seed;
        j["arch"] = r.arch;
        j["instrumentation"] = r.instrumentation;
        put_opt(j, "tau", r.tau);
        j["temperature"] = r.temperature;
        put_opt(j, "p", r.prior_fraction);
        j["source"] = r.source;
        if (r.budget) j["budget"] = *r.budget;
        j["label_mode"] = r.label_mode;
        put_opt(j, "victim_acc", r.victim_acc);
        put_opt(j, "attack_acc", r.attack_acc);
        put_opt(j, "gap", r.gap);
        put_opt(j, "agreement_real", r.agreement_real);
        put_opt(j, "agreement_fake", r.agreement_fake);
        put_opt(j, "fpr", r.fpr);
        put_opt(j, "hybrid_acc", r.hybrid_acc);
        j["error"] = r.error;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string convergence_to_csv(const std::vector<ConvergencePoint>& pts) {
    std::ostringstream out;
    out << "epoch,test_accuracy,label_mode,p\n";
    for (const auto& pt : pts)
        out << pt.epoch << "," << io::fmt_g6(pt.test_accuracy) << "," << pt.label_mode << ","
            << io::fmt_g6(pt.prior_fraction) << "\n";
    return out.str();
}

namespace {
std::string manifest_json(const ExperimentSpec& spec, std::size_t n_records) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["kind"] = to_string(spec.kind);
    j["tool_version"] = kToolVersion;
    j["seeds"] = spec.seeds;
    j["n_records"] = n_records;
    // The spec echo describes the experiment, not its destination, so the
    // manifest stays byte-identical across runs into different directories.
    auto echo = nlohmann::json::parse(spec_to_json(spec));
    echo.erase("out_dir");
    j["spec"] = echo;
    return j.dump(2) + "\n";
}
}  // namespace

std::string emit(const ExperimentSpec& spec, const GridOutput& out, EmitFormat format) {
    namespace fs = std::filesystem;
    fs::create_directories(spec.out_dir);
    const std::string metrics_path =
        (fs::path(spec.out_dir) / (format == EmitFormat::csv ? "metrics.csv" : "metrics.json"))
            .string();
    io::write_file(metrics_path, format == EmitFormat::csv ? records_to_csv(out.records)
                                                           : records_to_json(out.records));
    if (spec.kind == ExperimentKind::attack_grid) {
        io::write_file((fs::path(spec.out_dir) / "convergence.csv").string(),
                       convergence_to_csv(out.convergence));
    }
    io::write_file((fs::path(spec.out_dir) / "manifest.json").string(),
                   manifest_json(spec, out.records.size()));
    return metrics_path;
}

std::vector<std::string> run_experiment(const ExperimentSpec& spec, int workers,
                                        EmitFormat format) {
    namespace fs = std::filesystem;
    spec.validate();
    std::vector<std::string> written;
    fs::create_directories(spec.out_dir);

    if (spec.kind == ExperimentKind::attack_grid ||
        spec.kind == ExperimentKind::instrumentation_table) {
        const auto out = run_grid(spec, workers);
        written.push_back(emit(spec, out, format));
        if (spec.kind == ExperimentKind::attack_grid)
            written.push_back((fs::path(spec.out_dir) / "convergence.csv").string());
        written.push_back((fs::path(spec.out_dir) / "manifest.json").string());
        return written;
    }

    if (spec.kind == ExperimentKind::overlap_sweep) {
        for (const auto& cfg : spec.sweep_configs) {
            const auto rows = sampling::sweep_overlap(
                cfg.mu, cfg.sigma, spec.sweep_pairs,
                derive_seed(spec.seeds[0], "sweep-" + cfg.tag));
            std::ostringstream os;
            os << "w2,overlap,overlap_mc\n";
            for (const auto& row : rows)
                os << io::fmt_g6(row.w2) << "," << io::fmt_g6(row.overlap) << ","
                   << io::fmt_g6(row.overlap_mc) << "\n";
            const auto path = (fs::path(spec.out_dir) / ("sweep_" + cfg.tag + ".csv")).string();
            io::write_file(path, os.str());
            written.push_back(path);
        }
        const auto mpath = (fs::path(spec.out_dir) / "manifest.json").string();
        io::write_file(mpath, manifest_json(spec, 0));
        written.push_back(mpath);
        return written;
    }

    // volume_estimate: one trained victim, a threshold x temperature sweep,
    // plus confidence histograms of the train set vs random queries.
    const std::uint64_t seed = spec.seeds[0];
    const auto train =
        data::sample_ind(spec.ind_spec, spec.n_train, derive_seed(seed, "data-train"));
    const auto test =
        data::sample_ind(spec.ind_spec, spec.n_test, derive_seed(seed, "data-test"));
    const auto* mix = std::get_if<data::GaussianMixtureSpec>(&spec.ind_spec.params);
    if (!mix) throw ConfigError("experiment: ind spec must be a gaussian mixture");
    model::TrainConfig cfg = spec.victim_cfg;
    cfg.seed = derive_seed(seed, "victim-train", 0);
    const auto victim =
        model::train(train, spec.victim_archs[0], mix->n_classes, cfg, spec.activation);

    std::ostringstream vol;
    vol << "threshold,T,fraction_random,fraction_ind_test\n";
    for (double T : spec.volume_temps)
        for (double thr : spec.volume_thresholds) {
            const auto est = sampling::estimate_ind_volume(
                victim, spec.volume_n_random, thr, T, spec.random_spec,
                derive_seed(seed, "volume-queries"), &test);
            vol << io::fmt_g6(thr) << "," << io::fmt_g6(T) << ","
                << io::fmt_g6(est.fraction_random) << "," << io::fmt_g6(est.fraction_ind_test)
                << "\n";
        }
    const auto vpath = (fs::path(spec.out_dir) / "volume.csv").string();
    io::write_file(vpath, vol.str());
    written.push_back(vpath);

    const auto random_queries = data::sample_ood(spec.random_spec, spec.volume_n_random,
                                                 derive_seed(seed, "volume-queries"));
    std::ostringstream hist;
    hist << "dataset,T,bin_lo,bin_hi,count\n";
    for (double T : spec.volume_temps) {
        const auto pairs = {std::pair<const char*, const data::Dataset*>{"ind-train", &train},
                            std::pair<const char*, const data::Dataset*>{"random",
                                                                         &random_queries}};
        for (const auto& [tag, ds] : pairs) {
            const auto h = confidence_histogram(victim, *ds, 20, T);
            for (std::size_t b = 0; b + 1 < h.edges.size(); ++b)
                hist << tag << "," << io::fmt_g6(T) << "," << io::fmt_g6(h.edges[b]) << ","
                     << io::fmt_g6(h.edges[b + 1]) << "," << h.counts[b] << "\n";
        }
    }
    const auto hpath = (fs::path(spec.out_dir) / "histograms.csv").string();
    io::write_file(hpath, hist.str());
    written.push_back(hpath);

    const auto mpath = (fs::path(spec.out_dir) / "manifest.json").string();
    io::write_file(mpath, manifest_json(spec, 0));
    written.push_back(mpath);
    return written;
}

Histogram confidence_histogram(const model::MLPClassifier& m, const data::Dataset& ds,
                               int bins, double T) {
    if (bins < 1) throw InputError("histogram: bins must be >= 1");
    const double lo = 1.0 / static_cast<double>(m.n_classes());
    const double width = (1.0 - lo) / bins;
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = lo + width * b;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double conf = model::confidence(m, ds.samples.row(i), T);
        const double clamped = std::min(std::max(conf, lo), 1.0);
        auto b = width > 0.0 ? static_cast<std::size_t>((clamped - lo) / width)
                             : std::size_t{0};
        if (b >= static_cast<std::size_t>(bins)) b = static_cast<std::size_t>(bins) - 1;
        ++h.counts[b];
    }
    return h;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

// Shared desk task: 10 Gaussian classes on a ring in the first two of ten
// dimensions; the other eight carry class-independent noise that a
// small-prior attacker overfits. The surrogate source is the same ring
// rotated half a class angle (onto the victim's low-confidence webs) with a
// narrower noise spread.
ExperimentSpec base_spec() {
    ExperimentSpec s;
    s.ind_spec = data::make_ring_mixture(10, 3.0, 0.58, "ring10", 10, 1.5);
    s.random_spec = data::make_uniform_box(10, -8.0, 8.0, "box8");
    const double half_class = 3.14159265358979323846 / 10.0;
    s.surrogate_spec = data::make_surrogate(
        data::make_ring_mixture(10, 3.0, 0.58, "ring10-rot", 10, 0.7, half_class),
        std::vector<double>(10, 0.0), 1.0, "ring10-rot");
    s.n_train = 2000;
    s.n_test = 2000;
    s.victim_archs = {{96, 96}};
    s.activation = model::Activation::tanh;
    s.victim_cfg.epochs = 400;
    s.victim_cfg.batch_size = 32;
    s.victim_cfg.learning_rate = 0.05;
    s.victim_cfg.momentum = 0.9;
    s.attacker_cfg = s.victim_cfg;
    s.attacker_cfg.epochs = 120;
    s.budgets = {s.n_train};
    s.modes = {attack::LabelMode::soft};
    s.sources = {attack::OodSource::surrogate};
    s.instr_settings = {InstrumentSetting{true, 0.0, 5, instrument::PermMode::distinct}};
    return s;
}

InstrumentSetting real_arm() { return InstrumentSetting{true, 0.0, 5, instrument::PermMode::distinct}; }
InstrumentSetting hybrid_arm(double tau, int m = 5,
                             instrument::PermMode pm = instrument::PermMode::distinct) {
    return InstrumentSetting{false, tau, m, pm};
}

}  // namespace

ExperimentSpec preset(const std::string& name) {
    ExperimentSpec s = base_spec();
    s.name = name;
    if (name == "q1") {
        // Baseline vs OOD-filled attackers at a fixed budget.
        s.priors = {0.0, 0.05, 0.1, 0.3, 0.5};
        s.sources = {attack::OodSource::none, attack::OodSource::random,
                     attack::OodSource::surrogate, attack::OodSource::adaptive};
    } else if (name == "q2") {
        // Prior-knowledge sweep of the baseline attacker.
        s.priors = {0.05, 0.1, 0.3, 0.5, 1.0};
        s.sources = {attack::OodSource::none};
    } else if (name == "q3") {
        // OOD informativeness control: real model vs hybrid gate.
        s.priors = {0.05, 0.1, 0.3};
        s.instr_settings = {real_arm(), hybrid_arm(0.75), hybrid_arm(0.90), hybrid_arm(0.95)};
    } else if (name == "q4") {
        // Budget sweeps with and without the gate.
        s.priors = {0.05, 0.3};
        s.budgets = {2000, 4000, 8000};
        s.instr_settings = {real_arm(), hybrid_arm(0.90)};
    } else if (name == "q5") {
        // Labeling-oracle comparison: soft vs label-only vs ground truth.
        s.priors = {0.05, 0.3, 0.6};
        s.sources = {attack::OodSource::none};
        s.modes = {attack::LabelMode::soft, attack::LabelMode::label_only,
                   attack::LabelMode::ground_truth};
    } else if (name == "table1") {
        s.kind = ExperimentKind::instrumentation_table;
        s.table_taus = {0.0, 0.75, 0.90, 0.95, 0.99};
        s.table_temps = {1.0, 2.0};
    } else if (name == "fig6") {
        s.kind = ExperimentKind::overlap_sweep;
        s.sweep_configs = {SweepConfig{{0.0, 3.0}, {0.0, 5.0}, "a"},
                           SweepConfig{{0.0, 5.0}, {0.0, 1.0}, "b"},
                           SweepConfig{{0.0, 5.0}, {0.0, 3.0}, "c"}};
        s.sweep_pairs = 300;
    } else if (name == "fig7") {
        s.kind = ExperimentKind::volume_estimate;
        s.volume_thresholds = {0.5, 0.75, 0.9, 0.95, 0.99};
        s.volume_temps = {1.0, 2.0};
        s.volume_n_random = 20000;
    } else if (name == "ablation") {
        // The four anchor/permutation settings at a fixed gate.
        s.priors = {0.05, 0.1, 0.3};
        s.instr_settings = {hybrid_arm(0.90, 1, instrument::PermMode::identity),
                            hybrid_arm(0.90, 1, instrument::PermMode::shared),
                            hybrid_arm(0.90, 5, instrument::PermMode::shared),
                            hybrid_arm(0.90, 5, instrument::PermMode::distinct)};
    } else if (name == "modelsize") {
        s.priors = {0.05, 0.3};
        s.sources = {attack::OodSource::none};
        s.victim_archs = {{48, 48}, {96, 96}, {144, 144}};
        s.attacker_hidden = {96, 96};
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    return s;
}

std::vector<std::string> preset_names() {
    return {"q1", "q2", "q3", "q4", "q5", "table1", "fig6", "fig7", "ablation", "modelsize"};
}

void reseed(ExperimentSpec& spec, std::uint64_t master) {
    for (std::size_t i = 0; i < spec.seeds.size(); ++i)
        spec.seeds[i] = derive_seed(master, "run", i);
}

// ---------------------------------------------------------------------------
// Spec <-> JSON

namespace {

nlohmann::json train_cfg_to_json(const model::TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"momentum", c.momentum},
            {"loss", c.loss == model::Loss::hard_xent ? "hard" : "soft"}};
}

model::TrainConfig train_cfg_from_json(const nlohmann::json& j) {
    model::TrainConfig c;
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.momentum = j.at("momentum").get<double>();
    c.loss = j.value("loss", "hard") == "soft" ? model::Loss::soft_xent : model::Loss::hard_xent;
    return c;
}

}  // namespace

std::string spec_to_json(const ExperimentSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["kind"] = to_string(spec.kind);
    j["ind_spec"] = data::dist_to_json(spec.ind_spec);
    j["random_spec"] = data::dist_to_json(spec.random_spec);
    j["surrogate_spec"] = data::dist_to_json(spec.surrogate_spec);
    j["n_train"] = spec.n_train;
    j["n_test"] = spec.n_test;
    j["victim_archs"] = spec.victim_archs;
    j["victim_cfg"] = train_cfg_to_json(spec.victim_cfg);
    j["activation"] = spec.activation == model::Activation::relu ? "relu" : "tanh";
    j["attacker_hidden"] = spec.attacker_hidden;
    j["attacker_cfg"] = train_cfg_to_json(spec.attacker_cfg);
    j["temperature"] = spec.temperature;
    j["k_gmm"] = spec.k_gmm;
    j["per_class_samples"] = spec.per_class_samples;
    auto& ins = j["instr_settings"] = nlohmann::json::array();
    for (const auto& setting : spec.instr_settings)
        ins.push_back({{"real_model", setting.real_model},
                       {"tau", setting.tau},
                       {"anchors_m", setting.anchors_m},
                       {"perm_mode", perm_mode_name(setting.perm_mode)}});
    j["table_taus"] = spec.table_taus;
    j["table_temps"] = spec.table_temps;
    j["priors"] = spec.priors;
    auto& src = j["sources"] = nlohmann::json::array();
    for (auto v : spec.sources) src.push_back(attack::to_string(v));
    j["budgets"] = spec.budgets;
    auto& md = j["modes"] = nlohmann::json::array();
    for (auto v : spec.modes) md.push_back(attack::to_string(v));
    j["bandit_arms"] = spec.bandit_arms;
    j["bandit_epsilon"] = spec.bandit_epsilon;
    j["bandit_pool"] = spec.bandit_pool;
    j["bandit_batch"] = spec.bandit_batch;
    auto& sw = j["sweep_configs"] = nlohmann::json::array();
    for (const auto& c : spec.sweep_configs)
        sw.push_back({{"mu_lo", c.mu.lo},
                      {"mu_hi", c.mu.hi},
                      {"sigma_lo", c.sigma.lo},
                      {"sigma_hi", c.sigma.hi},
                      {"tag", c.tag}});
    j["sweep_pairs"] = spec.sweep_pairs;
    j["volume_thresholds"] = spec.volume_thresholds;
    j["volume_temps"] = spec.volume_temps;
    j["volume_n_random"] = spec.volume_n_random;
    j["seeds"] = spec.seeds;
    j["out_dir"] = spec.out_dir;
    return j.dump(2) + "\n";
}

ExperimentSpec spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment json: ") + e.what());
    }
    ExperimentSpec s;
    s.name = j.value("name", "custom");
    s.kind = kind_from_string(j.at("kind").get<std::string>());
    s.ind_spec = data::dist_from_json(j.at("ind_spec"));
    s.random_spec = data::dist_from_json(j.at("random_spec"));
    s.surrogate_spec = data::dist_from_json(j.at("surrogate_spec"));
    s.n_train = j.at("n_train").get<std::size_t>();
    s.n_test = j.at("n_test").get<std::size_t>();
    s.victim_archs = j.at("victim_archs").get<std::vector<std::vector<int>>>();
    s.victim_cfg = train_cfg_from_json(j.at("victim_cfg"));
    s.activation = j.value("activation", "relu") == "tanh" ? model::Activation::tanh
                                                           : model::Activation::relu;
    s.attacker_hidden = j.value("attacker_hidden", std::vector<int>{});
    s.attacker_cfg = train_cfg_from_json(j.at("attacker_cfg"));
    s.temperature = j.value("temperature", 2.0);
    s.k_gmm = j.value("k_gmm", 3);
    s.per_class_samples = j.value("per_class_samples", std::size_t{5000});
    s.instr_settings.clear();
    for (const auto& ij : j.at("instr_settings")) {
        InstrumentSetting setting;
        setting.real_model = ij.at("real_model").get<bool>();
        setting.tau = ij.at("tau").get<double>();
        setting.anchors_m = ij.at("anchors_m").get<int>();
        setting.perm_mode = perm_mode_from_string(ij.at("perm_mode").get<std::string>());
        s.instr_settings.push_back(setting);
    }
    s.table_taus = j.value("table_taus", std::vector<double>{});
    s.table_temps = j.value("table_temps", std::vector<double>{});
    s.priors = j.value("priors", std::vector<double>{});
    s.sources.clear();
    for (const auto& v : j.value("sources", std::vector<std::string>{}))
        s.sources.push_back(attack::ood_source_from_string(v));
    s.budgets = j.value("budgets", std::vector<std::size_t>{});
    s.modes.clear();
    for (const auto& v : j.value("modes", std::vector<std::string>{}))
        s.modes.push_back(attack::label_mode_from_string(v));
    s.bandit_arms = j.value("bandit_arms", 20);
    s.bandit_epsilon = j.value("bandit_epsilon", 0.1);
    s.bandit_pool = j.value("bandit_pool", std::size_t{8000});
    s.bandit_batch = j.value("bandit_batch", std::size_t{50});
    s.sweep_configs.clear();
    for (const auto& cj : j.value("sweep_configs", nlohmann::json::array())) {
        SweepConfig c;
        c.mu = {cj.at("mu_lo").get<double>(), cj.at("mu_hi").get<double>()};
        c.sigma = {cj.at("sigma_lo").get<double>(), cj.at("sigma_hi").get<double>()};
        c.tag = cj.at("tag").get<std::string>();
        s.sweep_configs.push_back(std::move(c));
    }
    s.sweep_pairs = j.value("sweep_pairs", std::size_t{300});
    s.volume_thresholds = j.value("volume_thresholds", std::vector<double>{});
    s.volume_temps = j.value("volume_temps", std::vector<double>{});
    s.volume_n_random = j.value("volume_n_random", std::size_t{20000});
    s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    s.out_dir = j.value("out_dir", "out");
    return s;
}

}  // namespace harness
