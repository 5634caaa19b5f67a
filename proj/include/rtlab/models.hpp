#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "rtlab/rng.hpp"
#include "rtlab/track.hpp"

namespace rtlab {

// 15 -> 64 -> 64 -> 9 feedforward network, rectifier hidden units, linear
// output. Serves both as action classifier and as Q-network.
struct Mlp {
    static constexpr int kIn = 15;
    static constexpr int kHidden = 64;
    static constexpr int kOut = 9;

    std::vector<double> w1;  // kHidden x kIn, row-major
    std::vector<double> b1;  // kHidden
    std::vector<double> w2;  // kHidden x kHidden
    std::vector<double> b2;  // kHidden
    std::vector<double> w3;  // kOut x kHidden
    std::vector<double> b3;  // kOut

    bool operator==(const Mlp&) const = default;
};

using Scores = std::array<double, 9>;

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
Mlp mlp_init(Rng& rng);

Scores mlp_forward(const Mlp& mlp, const FeatureVector& input);

struct TrainBatch {
    std::vector<FeatureVector> inputs;
    std::vector<Scores> targets;
};

// Mean over the batch of the squared error summed over the 9 outputs.
double mlp_loss(const Mlp& mlp, const TrainBatch& batch);

struct MlpGradient {
    std::vector<double> w1, b1, w2, b2, w3, b3;
};

MlpGradient mlp_gradient(const Mlp& mlp, const TrainBatch& batch, double* loss = nullptr);

// One plain gradient-descent update; returns the pre-update loss.
double mlp_train_batch(Mlp& mlp, const TrainBatch& batch, double step_size);

// Argmax with ties broken by canonical action order.
Action greedy_action(const Scores& scores);

enum class LinearKind { Lda, LogisticRegression };

struct LinearModel {
    LinearKind kind = LinearKind::Lda;
    std::array<bool, 9> present{};  // classes seen in training data
    // LDA
    std::array<std::array<double, 15>, 9> means{};
    std::array<double, 225> cov_inv{};  // 15x15 row-major
    std::array<double, 9> priors{};
    // logistic regression
    std::array<double, 135> weights{};  // 9x15 row-major
    std::array<double, 9> bias{};

    bool operator==(const LinearModel&) const = default;
};

struct InsufficientClasses : std::runtime_error {
    InsufficientClasses() : std::runtime_error("linear_fit needs at least 2 distinct labels") {}
};

// Single-label training pairs: (features, action index).
LinearModel linear_fit(LinearKind kind, const std::vector<std::pair<FeatureVector, int>>& samples);
Scores linear_scores(const LinearModel& model, const FeatureVector& features);
Action linear_predict(const LinearModel& model, const FeatureVector& features);

using Model = std::variant<Mlp, LinearModel>;

struct ModelFormatError : std::runtime_error {
    explicit ModelFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// JSON with format version and architecture; binary64 values round-trip
// exactly.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace rtlab
