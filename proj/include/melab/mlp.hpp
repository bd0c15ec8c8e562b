#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "melab/dataset.hpp"
#include "melab/mat.hpp"

namespace melab::model {

using ProbVector = std::vector<double>;

enum class Activation { relu, tanh };
enum class Loss { hard_xent, soft_xent };

struct TrainConfig {
    int epochs = 40;
    int batch_size = 32;
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::uint64_t seed = 1;
    Loss loss = Loss::hard_xent;
};

// Fully-connected classifier. layer_sizes = {input dim, hidden..., C};
// hidden layers use `activation`, the output layer is linear (logits).
struct MLPClassifier {
    std::vector<int> layer_sizes;
    Activation activation = Activation::relu;
    std::vector<Mat> weights;                 // [l]: layer_sizes[l+1] x layer_sizes[l]
    std::vector<std::vector<double>> biases;  // [l]: layer_sizes[l+1]
    bool trained = false;
    std::uint64_t seed = 0;
    std::vector<double> epoch_loss;

    int input_dim() const { return layer_sizes.front(); }
    int n_classes() const { return layer_sizes.back(); }
};

// Soft-target training set: full probability rows instead of hard labels.
struct SoftTargets {
    Mat inputs;   // n x dim
    Mat targets;  // n x C, each row a valid probability vector
};

// Optional per-epoch trace filled during training.
struct TrainTrace {
    std::vector<double> loss;       // mean cross-entropy per epoch
    std::vector<double> eval_acc;   // top-1 accuracy on eval set, if provided
};

MLPClassifier init_mlp(const std::vector<int>& layer_sizes, Activation act, std::uint64_t seed);

// SGD with momentum on cross-entropy. Hard labels.
MLPClassifier train(const data::Dataset& ds, const std::vector<int>& hidden, int n_classes,
                    const TrainConfig& cfg, Activation act = Activation::relu,
                    const data::Dataset* eval = nullptr, TrainTrace* trace = nullptr);

// Cross-entropy against full probability targets (one-hot rows reduce to the
// hard-label loss).
MLPClassifier train_soft(const SoftTargets& st, const std::vector<int>& hidden,
                         const TrainConfig& cfg, Activation act = Activation::relu,
                         const data::Dataset* eval = nullptr, TrainTrace* trace = nullptr);

std::vector<double> logits(const MLPClassifier& m, std::span<const double> x);

// Post-activation output of the last hidden layer (the input itself for a
// single-layer model).
std::vector<double> penultimate(const MLPClassifier& m, std::span<const double> x);

// Numerically-stabilized softmax with temperature: p_i = exp(z_i/T)/sum.
ProbVector softmax(std::span<const double> z, double T);

ProbVector predict_proba(const MLPClassifier& m, std::span<const double> x, double T);

double confidence(const MLPClassifier& m, std::span<const double> x, double T);

int argmax(std::span<const double> v);

int predict_class(const MLPClassifier& m, std::span<const double> x);

double accuracy(const MLPClassifier& m, const data::Dataset& ds);

// Gradient of the mean cross-entropy loss over a batch, flattened in the
// same order as flatten_params(). Used by training and the gradient checks.
std::vector<double> loss_gradient(const MLPClassifier& m, const Mat& X, const Mat& targets);
double loss_value(const MLPClassifier& m, const Mat& X, const Mat& targets);
std::vector<double> flatten_params(const MLPClassifier& m);
void unflatten_params(MLPClassifier& m, std::span<const double> theta);

std::string to_json(const MLPClassifier& m);
MLPClassifier mlp_from_json(const std::string& text);
void save_model(const MLPClassifier& m, const std::string& path);
MLPClassifier load_model(const std::string& path);

}  // namespace melab::model
