#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "drl/matrix.hpp"
#include "drl/replay.hpp"

namespace drl {

// Fully connected network: affine layers with ReLU on hidden layers and
// identity on the output. Weights are row-major (out_dim x in_dim).
class MlpPolicy {
public:
    struct Layer {
        std::size_t in_dim;
        std::size_t out_dim;
        Matrix weights;               // out_dim x in_dim
        std::vector<double> biases;   // out_dim

        friend bool operator==(const Layer&, const Layer&) = default;
    };

    MlpPolicy() = default;
    explicit MlpPolicy(std::vector<Layer> layers);

    // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] from the seeded rng.
    static MlpPolicy initialize(std::span<const std::size_t> dims, std::mt19937_64& rng);

    std::size_t input_dim() const { return layers_.front().in_dim; }
    std::size_t output_dim() const { return layers_.back().out_dim; }
    std::size_t layer_count() const { return layers_.size(); }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    // states: batch x input_dim -> batch x output_dim.
    Matrix forward(const Matrix& states) const;

    struct ForwardCache {
        std::vector<Matrix> activations;  // [input, hidden..., output], batch rows each
    };
    ForwardCache forward_cached(const Matrix& states) const;

    friend bool operator==(const MlpPolicy&, const MlpPolicy&) = default;

private:
    std::vector<Layer> layers_;
};

// Per-layer parameter gradients accumulated as sums over the contributing
// samples (aggregation reweights by sub-batch size, see aggregate_and_step).
struct GradientSet {
    std::vector<Matrix> weight_grads;
    std::vector<std::vector<double>> bias_grads;
    std::size_t sample_count = 0;
};

struct TrainBatch {
    std::vector<Experience> experiences;
    std::vector<std::size_t> indices;   // replay leaf indices
    std::size_t sub_batches = 1;
};

struct TrainResult {
    std::vector<double> new_priorities;  // |TD error| + floor, one per experience
    MlpPolicy new_weights;
    double loss = 0.0;
};

struct TdLossResult {
    double loss = 0.0;                 // mean squared TD error
    std::vector<double> td_errors;     // Q(s,a) - y per sample
};

// y = r + gamma * max_a' Q_target(s', a') * (1 - done); loss = mean (Q(s,a) - y)^2.
TdLossResult td_loss(const MlpPolicy& policy, const MlpPolicy& target_policy,
                     std::span<const Experience> batch, double gamma);

// Backprop for loss gradients dL/d(output) of shape batch x output_dim, given
// the cached forward activations. Returns gradients of the implied scalar sum.
GradientSet backward(const MlpPolicy& policy, const MlpPolicy::ForwardCache& cache,
                     const Matrix& loss_grads);

// Sums the sub-batch gradient sets in ascending index, divides by batch_size
// and applies one SGD step: w <- w - lr * g. Throws on an empty list.
void aggregate_and_step(MlpPolicy& policy, std::span<const GradientSet> grads,
                        double learning_rate, std::size_t batch_size);

struct LearnerConfig {
    std::vector<std::size_t> layer_dims;
    double learning_rate = 1e-3;
    double gamma = 0.99;
    std::size_t sub_batches = 1;
    std::size_t sync_period = 200;  // target-network refresh interval (iterations)
    std::uint64_t seed = 1;
    double priority_floor = 1e-6;
};

// DQN-style trainer: owns the online policy and its target copy, runs
// FP -> LOSS -> BP -> GA per iteration and emits |TD| priorities.
class Learner {
public:
    explicit Learner(const LearnerConfig& config);

    const MlpPolicy& policy() const { return policy_; }
    const MlpPolicy& target_policy() const { return target_; }
    std::uint64_t iterations() const { return iterations_; }
    const LearnerConfig& config() const { return config_; }

    TrainResult train_iteration(const TrainBatch& batch);

private:
    LearnerConfig config_;
    MlpPolicy policy_;
    MlpPolicy target_;
    std::uint64_t iterations_ = 0;
};

}  // namespace drl
