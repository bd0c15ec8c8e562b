#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "melab/attack.hpp"
#include "melab/dataset.hpp"
#include "melab/fake_model.hpp"
#include "melab/mlp.hpp"
#include "melab/sampling.hpp"

namespace melab::harness {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ExperimentKind { attack_grid, instrumentation_table, overlap_sweep, volume_estimate };

std::string to_string(ExperimentKind k);

// One instrumentation arm: either the unmodified victim or a hybrid with the
// given gate threshold and fake-model layout.
struct InstrumentSetting {
    bool real_model = true;
    double tau = 0.9;
    int anchors_m = 5;
    instrument::PermMode perm_mode = instrument::PermMode::distinct;

    std::string label() const;
};

struct SweepConfig {
    sampling::Range mu;
    sampling::Range sigma;
    std::string tag;
};

struct ExperimentSpec {
    std::string name = "custom";
    ExperimentKind kind = ExperimentKind::attack_grid;

    // Task.
    data::DistributionSpec ind_spec;
    data::DistributionSpec random_spec;     // uniform box used for random fill
    data::DistributionSpec surrogate_spec;  // shifted surrogate fill
    std::size_t n_train = 2000;
    std::size_t n_test = 2000;

    // Victim(s).
    std::vector<std::vector<int>> victim_archs = {{32, 32}};
    model::TrainConfig victim_cfg;
    model::Activation activation = model::Activation::relu;

    // Attacker (architecture defaults to the victim's when empty).
    std::vector<int> attacker_hidden;
    model::TrainConfig attacker_cfg;

    // Instrumentation shared knobs.
    double temperature = 2.0;
    int k_gmm = 3;
    std::size_t per_class_samples = 5000;
    std::vector<InstrumentSetting> instr_settings = {InstrumentSetting{}};
    std::vector<double> table_taus;   // instrumentation_table cells
    std::vector<double> table_temps;

    // Policy grid.
    std::vector<double> priors;
    std::vector<attack::OodSource> sources;
    std::vector<std::size_t> budgets;
    std::vector<attack::LabelMode> modes;

    // Adaptive policy knobs.
    int bandit_arms = 20;
    double bandit_epsilon = 0.1;
    std::size_t bandit_pool = 8000;
    std::size_t bandit_batch = 50;

    // Sampling presets.
    std::vector<SweepConfig> sweep_configs;
    std::size_t sweep_pairs = 300;
    std::vector<double> volume_thresholds;
    std::vector<double> volume_temps;
    std::size_t volume_n_random = 20000;

    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string out_dir = "out";

    void validate() const;
};

// One row per grid cell x seed. Wall-clock stays in memory; serialized
// outputs must be byte-identical across runs of the same spec and seeds.
struct RunRecord {
    std::string preset;
    std::uint64_t seed = 0;
    std::string arch;
    std::string instrumentation;  // "real" or the instrument setting label
    std::optional<double> tau;
    double temperature = 1.0;
    std::optional<double> prior_fraction;
    std::string source;
    std::optional<std::size_t> budget;
    std::string label_mode;
    std::optional<double> victim_acc;
    std::optional<double> attack_acc;
    std::optional<double> gap;
    std::optional<double> agreement_real;
    std::optional<double> agreement_fake;
    std::optional<double> fpr;
    std::optional<double> hybrid_acc;
    std::string error;
    double wall_ms = 0.0;  // not serialized
};

struct ConvergencePoint {
    int epoch = 0;
    double test_accuracy = 0.0;
    std::string label_mode;
    double prior_fraction = 0.0;
};

struct GridOutput {
    std::vector<RunRecord> records;
    std::vector<ConvergencePoint> convergence;
};

// Runs every (cell x seed) of an attack_grid or instrumentation_table spec.
// Victims are trained once per (arch, seed); cells execute on up to `workers`
// threads; results are ordered by (cell, seed) independent of scheduling.
GridOutput run_grid(const ExperimentSpec& spec, int workers = 1);

enum class EmitFormat { csv, json };

std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& text);
std::string records_to_json(const std::vector<RunRecord>& records);
std::string convergence_to_csv(const std::vector<ConvergencePoint>& pts);

// Writes the metrics file plus a manifest (spec echo, seeds, tool version)
// into spec.out_dir. Returns the metrics file path.
std::string emit(const ExperimentSpec& spec, const GridOutput& out, EmitFormat format);

// Dispatches on spec.kind, writes all output files, returns them.
std::vector<std::string> run_experiment(const ExperimentSpec& spec, int workers,
                                        EmitFormat format);

struct Histogram {
    std::vector<double> edges;        // bins + 1, spanning [1/C, 1]
    std::vector<std::size_t> counts;  // sums to |dataset|
};

Histogram confidence_histogram(const model::MLPClassifier& m, const data::Dataset& ds,
                               int bins, double T);

// Named presets matching the desk-scale experiment layouts.
ExperimentSpec preset(const std::string& name);
std::vector<std::string> preset_names();

// Re-seeds a spec's repeat list from one master seed.
void reseed(ExperimentSpec& spec, std::uint64_t master);

std::string spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const std::string& text);

}  // namespace melab::harness
