#include "drl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace drl {

MlpPolicy::MlpPolicy(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("policy needs at least one layer");
    for (std::size_t l = 1; l < layers_.size(); ++l) {
        if (layers_[l].in_dim != layers_[l - 1].out_dim)
            throw std::invalid_argument("layer dims do not chain at layer " + std::to_string(l));
    }
}

MlpPolicy MlpPolicy::initialize(std::span<const std::size_t> dims, std::mt19937_64& rng) {
    if (dims.size() < 2) throw std::invalid_argument("need at least input and output dims");
    std::vector<Layer> layers;
    layers.reserve(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer{dims[l], dims[l + 1], Matrix(dims[l + 1], dims[l]),
                    std::vector<double>(dims[l + 1], 0.0)};
        double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& w : layer.weights.data()) w = dist(rng);
        for (double& b : layer.biases) b = dist(rng);
        layers.push_back(std::move(layer));
    }
    return MlpPolicy(std::move(layers));
}

namespace {

void affine_forward(const MlpPolicy::Layer& layer, const Matrix& in, Matrix& out, bool relu) {
    for (std::size_t r = 0; r < in.rows(); ++r) {
        for (std::size_t o = 0; o < layer.out_dim; ++o) {
            double acc = layer.biases[o];
            for (std::size_t i = 0; i < layer.in_dim; ++i)
                acc += layer.weights(o, i) * in(r, i);
            out(r, o) = relu ? std::max(0.0, acc) : acc;
        }
    }
}

}  // namespace

Matrix MlpPolicy::forward(const Matrix& states) const {
    return forward_cached(states).activations.back();
}

MlpPolicy::ForwardCache MlpPolicy::forward_cached(const Matrix& states) const {
    if (states.cols() != input_dim())
        throw std::invalid_argument("forward: state dim " + std::to_string(states.cols()) +
                                    " != input dim " + std::to_string(input_dim()));
    ForwardCache cache;
    cache.activations.reserve(layers_.size() + 1);
    cache.activations.push_back(states);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        bool hidden = l + 1 < layers_.size();
        Matrix out(cache.activations.back().rows(), layers_[l].out_dim);
        affine_forward(layers_[l], cache.activations.back(), out, hidden);
        cache.activations.push_back(std::move(out));
    }
    return cache;
}

TdLossResult td_loss(const MlpPolicy& policy, const MlpPolicy& target_policy,
                     std::span<const Experience> batch, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must be in [0,1]");
    if (batch.empty()) throw std::invalid_argument("td_loss: empty batch");

    std::size_t n = batch.size();
    Matrix states(n, policy.input_dim());
    Matrix next_states(n, policy.input_dim());
    for (std::size_t r = 0; r < n; ++r) {
        if (batch[r].state.size() != policy.input_dim() ||
            batch[r].next_state.size() != policy.input_dim())
            throw std::invalid_argument("td_loss: experience state dim mismatch");
        for (std::size_t c = 0; c < policy.input_dim(); ++c) {
            states(r, c) = batch[r].state[c];
            next_states(r, c) = batch[r].next_state[c];
        }
    }

    Matrix q = policy.forward(states);
    Matrix q_next = target_policy.forward(next_states);

    TdLossResult result;
    result.td_errors.resize(n);
    double loss_sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        long action = batch[r].action;
        if (action < 0 || static_cast<std::size_t>(action) >= policy.output_dim())
            throw std::invalid_argument("td_loss: action out of range");
        double best_next = q_next(r, 0);
        for (std::size_t a = 1; a < policy.output_dim(); ++a)
            best_next = std::max(best_next, q_next(r, a));
        double y = batch[r].reward +
                   gamma * best_next * (batch[r].done ? 0.0 : 1.0);
        double td = q(r, static_cast<std::size_t>(action)) - y;
        result.td_errors[r] = td;
        loss_sum += td * td;
    }
    result.loss = loss_sum / static_cast<double>(n);
    return result;
}

GradientSet backward(const MlpPolicy& policy, const MlpPolicy::ForwardCache& cache,
                     const Matrix& loss_grads) {
    const auto& layers = policy.layers();
    if (cache.activations.size() != layers.size() + 1)
        throw std::invalid_argument("backward: cache does not match policy depth");
    if (!loss_grads.same_shape(cache.activations.back()))
        throw std::invalid_argument("backward: loss_grads shape mismatch");

    GradientSet grads;
    grads.sample_count = loss_grads.rows();
    grads.weight_grads.resize(layers.size());
    grads.bias_grads.resize(layers.size());

    Matrix delta = loss_grads;  // dL/d(pre-activation) of the output layer (identity)
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& layer = layers[l];
        const Matrix& input = cache.activations[l];

        Matrix& dw = grads.weight_grads[l];
        dw = Matrix(layer.out_dim, layer.in_dim);
        auto& db = grads.bias_grads[l];
        db.assign(layer.out_dim, 0.0);

        for (std::size_t r = 0; r < delta.rows(); ++r) {
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                double d = delta(r, o);
                db[o] += d;
                for (std::size_t i = 0; i < layer.in_dim; ++i)
                    dw(o, i) += d * input(r, i);
            }
        }

        if (l == 0) break;
        // Propagate through the previous layer's ReLU: a > 0 <=> z > 0.
        Matrix prev_delta(delta.rows(), layer.in_dim);
        for (std::size_t r = 0; r < delta.rows(); ++r) {
            for (std::size_t i = 0; i < layer.in_dim; ++i) {
                double acc = 0.0;
                for (std::size_t o = 0; o < layer.out_dim; ++o)
                    acc += delta(r, o) * layer.weights(o, i);
                prev_delta(r, i) = input(r, i) > 0.0 ? acc : 0.0;
            }
        }
        delta = std::move(prev_delta);
    }
    return grads;
}

void aggregate_and_step(MlpPolicy& policy, std::span<const GradientSet> grads,
                        double learning_rate, std::size_t batch_size) {
    if (grads.empty()) throw std::invalid_argument("aggregate_and_step: no gradients");
    if (batch_size == 0) throw std::invalid_argument("aggregate_and_step: batch_size 0");

    auto& layers = policy.layers();
    double scale = learning_rate / static_cast<double>(batch_size);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& layer = layers[l];
        std::vector<double> dw_sum(layer.weights.data().size(), 0.0);
        std::vector<double> db_sum(layer.out_dim, 0.0);
        // Sub-batch gradients are sums over their samples, so adding them in
        // ascending index reproduces the full-batch sum; / batch_size below
        // turns it into the mean-loss gradient.
        for (const GradientSet& g : grads) {
            if (g.weight_grads.size() != layers.size())
                throw std::invalid_argument("aggregate_and_step: gradient depth mismatch");
            const Matrix& dw = g.weight_grads[l];
            const auto& db = g.bias_grads[l];
            for (std::size_t k = 0; k < dw_sum.size(); ++k) dw_sum[k] += dw.data()[k];
            for (std::size_t o = 0; o < layer.out_dim; ++o) db_sum[o] += db[o];
        }
        for (std::size_t k = 0; k < dw_sum.size(); ++k)
            layer.weights.data()[k] -= scale * dw_sum[k];
        for (std::size_t o = 0; o < layer.out_dim; ++o)
            layer.biases[o] -= scale * db_sum[o];
    }
}

Learner::Learner(const LearnerConfig& config) : config_(config) {
    std::mt19937_64 rng(config.seed);
    policy_ = MlpPolicy::initialize(config.layer_dims, rng);
    target_ = policy_;
}

TrainResult Learner::train_iteration(const TrainBatch& batch) {
    std::size_t n = batch.experiences.size();
    if (n == 0) throw std::invalid_argument("train_iteration: empty batch");
    std::size_t parts = std::clamp<std::size_t>(batch.sub_batches, 1, n);

    // Equal-size sub-batches; remainder rides in the last one.
    std::size_t base = n / parts;
    std::vector<GradientSet> grads;
    grads.reserve(parts);
    TrainResult result;
    result.new_priorities.resize(n);
    double loss_sum = 0.0;

    std::size_t offset = 0;
    for (std::size_t p = 0; p < parts; ++p) {
        std::size_t count = p + 1 == parts ? n - offset : base;
        std::span<const Experience> part(batch.experiences.data() + offset, count);

        Matrix states(count, policy_.input_dim());
        for (std::size_t r = 0; r < count; ++r)
            for (std::size_t c = 0; c < policy_.input_dim(); ++c)
                states(r, c) = part[r].state[c];

        auto cache = policy_.forward_cached(states);
        auto td = td_loss(policy_, target_, part, config_.gamma);

        Matrix loss_grads(count, policy_.output_dim());
        for (std::size_t r = 0; r < count; ++r) {
            loss_grads(r, static_cast<std::size_t>(part[r].action)) = 2.0 * td.td_errors[r];
            result.new_priorities[offset + r] =
                std::abs(td.td_errors[r]) + config_.priority_floor;
        }
        loss_sum += td.loss * static_cast<double>(count);

        grads.push_back(backward(policy_, cache, loss_grads));
        offset += count;
    }

    aggregate_and_step(policy_, grads, config_.learning_rate, n);
    ++iterations_;
    if (config_.sync_period > 0 && iterations_ % config_.sync_period == 0) target_ = policy_;

    result.loss = loss_sum / static_cast<double>(n);
    result.new_weights = policy_;
    return result;
}

}  // namespace drl
