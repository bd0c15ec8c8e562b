#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "melab/dataset.hpp"
#include "melab/hybrid.hpp"
#include "melab/mlp.hpp"

namespace melab::attack {

enum class OodSource { none, random, surrogate, adaptive };
enum class LabelMode { soft, label_only, ground_truth };

std::string to_string(OodSource s);
std::string to_string(LabelMode m);
OodSource ood_source_from_string(const std::string& s);
LabelMode label_mode_from_string(const std::string& s);

// The attacker's query specification: prior fraction p, the OOD fill source,
// a total budget B, and the response type requested from the victim.
struct QueryPolicy {
    double prior_fraction = 0.0;
    OodSource ood_source = OodSource::none;
    std::size_t budget = 0;
    LabelMode label_mode = LabelMode::soft;
};

enum class SourceTag { prior, ood };

struct QuerySet {
    Mat queries;                  // B x dim
    std::vector<SourceTag> tags;  // aligned with queries
    std::vector<int> true_labels; // aligned; -1 where unknown (ood queries)

    std::size_t size() const { return queries.rows; }
};

struct LabeledQuerySet {
    Mat queries;
    Mat responses;  // B x C, soft rows or one-hot rows
    std::vector<SourceTag> tags;
    std::vector<instrument::Route> routes;  // where the hybrid answered from

    std::size_t size() const { return queries.rows; }
    std::size_t n_classes() const { return responses.cols; }
};

// Read-only query target shared by the plain victim and the hybrid.
class QueryTarget {
  public:
    virtual ~QueryTarget() = default;
    virtual instrument::HybridResponse respond(std::span<const double> x) const = 0;
    virtual const model::MLPClassifier& original_model() const = 0;
};

class ModelTarget final : public QueryTarget {
  public:
    ModelTarget(const model::MLPClassifier& m, double T) : m_(m), T_(T) {}
    instrument::HybridResponse respond(std::span<const double> x) const override {
        return {model::predict_proba(m_, x, T_), instrument::Route::original};
    }
    const model::MLPClassifier& original_model() const override { return m_; }

  private:
    const model::MLPClassifier& m_;
    double T_;
};

class HybridTarget final : public QueryTarget {
  public:
    explicit HybridTarget(const instrument::HybridVictim& h) : h_(h) {}
    instrument::HybridResponse respond(std::span<const double> x) const override {
        return instrument::hybrid_predict(h_, x);
    }
    const model::MLPClassifier& original_model() const override { return h_.original; }

  private:
    const instrument::HybridVictim& h_;
};

// Exactly B queries: every prior sample first, the remainder drawn from the
// OOD spec. With ood_source == none the budget must equal |prior|.
QuerySet build_query_set(const QueryPolicy& policy, const data::Dataset& prior,
                         const data::DistributionSpec& ood_spec, std::uint64_t seed);

// Soft responses, one-hot of the argmax, or one-hot of the true label.
// Ground-truth labels exist only for prior-tagged queries.
LabeledQuerySet query_victim(const QueryTarget& target, const QuerySet& qs, LabelMode mode);

model::MLPClassifier train_attacker(const LabeledQuerySet& lqs, const std::vector<int>& hidden,
                                    const model::TrainConfig& cfg,
                                    model::Activation act = model::Activation::relu,
                                    const data::Dataset* eval = nullptr,
                                    model::TrainTrace* trace = nullptr);

struct AttackResult {
    double attack_accuracy = 0.0;
    double victim_accuracy = 0.0;
    double gap = 0.0;
    double agreement_real = 0.0;
    std::optional<double> agreement_fake;
    std::vector<double> convergence;  // per-epoch IND-test accuracy
};

// Fake-routed evaluation set: queries plus the fake model's argmax labels.
struct FakeRoutedSet {
    Mat queries;
    std::vector<int> fake_labels;
};

AttackResult evaluate_attack(const model::MLPClassifier& attacker,
                             const model::MLPClassifier& victim, const data::Dataset& ind_test,
                             const FakeRoutedSet* fake_routed = nullptr,
                             const std::vector<double>* convergence = nullptr);

// Convenience: collect the fake-routed subset of a query stream against a
// hybrid victim.
FakeRoutedSet collect_fake_routed(const instrument::HybridVictim& h, const Mat& queries);

}  // namespace melab::attack
