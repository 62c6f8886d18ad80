#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "drl/mlp.hpp"

using drl::Experience;
using drl::GradientSet;
using drl::Learner;
using drl::LearnerConfig;
using drl::Matrix;
using drl::MlpPolicy;
using drl::TrainBatch;

namespace {

MlpPolicy random_policy(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return MlpPolicy::initialize(dims, rng);
}

// Naive second-path matmul chain for the forward oracle.
std::vector<double> forward_oracle(const MlpPolicy& policy, const std::vector<double>& input) {
    std::vector<double> current = input;
    const auto& layers = policy.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        std::vector<double> next(layers[l].out_dim, 0.0);
        for (std::size_t o = 0; o < layers[l].out_dim; ++o) {
            double acc = layers[l].biases[o];
            for (std::size_t i = 0; i < layers[l].in_dim; ++i)
                acc += layers[l].weights(o, i) * current[i];
            next[o] = l + 1 < layers.size() ? std::max(0.0, acc) : acc;
        }
        current = std::move(next);
    }
    return current;
}

Experience make_exp(std::vector<double> s, long a, std::vector<double> s2, double r, bool done) {
    return Experience{std::move(s), a, std::move(s2), r, done};
}

double batch_loss(const MlpPolicy& policy, const MlpPolicy& target,
                  const std::vector<Experience>& batch, double gamma) {
    return td_loss(policy, target, batch, gamma).loss;
}

std::vector<Experience> random_batch(std::size_t n, std::size_t state_dim,
                                     std::size_t actions, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    std::uniform_int_distribution<long> act(0, static_cast<long>(actions) - 1);
    std::vector<Experience> batch;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> s(state_dim), s2(state_dim);
        for (auto& x : s) x = v(rng);
        for (auto& x : s2) x = v(rng);
        batch.push_back(make_exp(std::move(s), act(rng), std::move(s2), v(rng), i % 5 == 0));
    }
    return batch;
}

}  // namespace

TEST_CASE("zero network maps anything to zero") {
    MlpPolicy policy({MlpPolicy::Layer{2, 3, Matrix(3, 2), std::vector<double>(3, 0.0)}});
    Matrix in(1, 2);
    in(0, 0) = 5.0;
    in(0, 1) = -3.0;
    Matrix out = policy.forward(in);
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == 0.0);
    CHECK(out(0, 2) == 0.0);
}

TEST_CASE("identity single layer passes input through") {
    Matrix w(2, 2);
    w(0, 0) = 1.0;
    w(1, 1) = 1.0;
    MlpPolicy policy({MlpPolicy::Layer{2, 2, w, {0.0, 0.0}}});
    Matrix in(1, 2);
    in(0, 0) = 1.0;
    in(0, 1) = 2.0;
    Matrix out = policy.forward(in);
    CHECK(out(0, 0) == 1.0);
    CHECK(out(0, 1) == 2.0);
}

TEST_CASE("forward matches the hand-rolled oracle") {
    auto policy = random_policy({4, 8, 3}, 42);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> v(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> input(4);
        for (auto& x : input) x = v(rng);
        Matrix in(1, 4);
        for (std::size_t c = 0; c < 4; ++c) in(0, c) = input[c];
        Matrix out = policy.forward(in);
        auto expected = forward_oracle(policy, input);
        for (std::size_t c = 0; c < 3; ++c)
            CHECK(out(0, c) == doctest::Approx(expected[c]).epsilon(1e-12));
    }
}

TEST_CASE("forward rejects wrong input dim") {
    auto policy = random_policy({4, 8, 3}, 42);
    CHECK_THROWS_AS(policy.forward(Matrix(1, 5)), std::invalid_argument);
}

TEST_CASE("td loss trivial cases") {
    // single layer, weights 0, bias sets Q exactly
    MlpPolicy one({MlpPolicy::Layer{1, 1, Matrix(1, 1), {1.0}}});
    auto exp1 = make_exp({0.0}, 0, {0.0}, 1.0, false);
    auto r1 = td_loss(one, one, std::vector<Experience>{exp1}, 0.0);
    CHECK(r1.loss == 0.0);  // gamma 0, reward 1, Q = 1
    CHECK(r1.td_errors[0] == 0.0);

    MlpPolicy two({MlpPolicy::Layer{1, 1, Matrix(1, 1), {2.0}}});
    auto exp2 = make_exp({0.0}, 0, {0.0}, 0.0, false);
    auto r2 = td_loss(two, two, std::vector<Experience>{exp2}, 0.0);
    CHECK(r2.td_errors[0] == 2.0);
    CHECK(r2.loss == 4.0);
}

TEST_CASE("td loss matches a scalar loop oracle") {
    auto policy = random_policy({3, 6, 2}, 9);
    auto target = random_policy({3, 6, 2}, 10);
    auto batch = random_batch(16, 3, 2, 11);
    double gamma = 0.9;
    auto result = td_loss(policy, target, batch, gamma);

    double expected_loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        auto q = forward_oracle(policy, batch[i].state);
        auto qn = forward_oracle(target, batch[i].next_state);
        double best = std::max(qn[0], qn[1]);
        double y = batch[i].reward + gamma * best * (batch[i].done ? 0.0 : 1.0);
        double td = q[static_cast<std::size_t>(batch[i].action)] - y;
        CHECK(result.td_errors[i] == doctest::Approx(td).epsilon(1e-10));
        expected_loss += td * td;
    }
    expected_loss /= static_cast<double>(batch.size());
    CHECK(result.loss == doctest::Approx(expected_loss).epsilon(1e-10));
}

TEST_CASE("gamma outside [0,1] rejected") {
    auto policy = random_policy({2, 2}, 1);
    auto batch = random_batch(2, 2, 2, 2);
    CHECK_THROWS_AS(td_loss(policy, policy, batch, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(td_loss(policy, policy, batch, 1.1), std::invalid_argument);
}

TEST_CASE("backward: zero input, single layer") {
    MlpPolicy policy({MlpPolicy::Layer{2, 2, Matrix(2, 2), {0.0, 0.0}}});
    Matrix in(1, 2);  // zeros
    auto cache = policy.forward_cached(in);
    Matrix loss_grads(1, 2);
    loss_grads(0, 0) = 3.0;
    loss_grads(0, 1) = -2.0;
    auto grads = backward(policy, cache, loss_grads);
    CHECK(grads.bias_grads[0][0] == 3.0);
    CHECK(grads.bias_grads[0][1] == -2.0);
    for (double g : grads.weight_grads[0].data()) CHECK(g == 0.0);
}

TEST_CASE("backward is linear in the loss gradients") {
    auto policy = random_policy({3, 5, 2}, 21);
    Matrix in(2, 3);
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    for (auto& x : in.data()) x = v(rng);
    auto cache = policy.forward_cached(in);

    Matrix g1(2, 2);
    for (auto& x : g1.data()) x = v(rng);
    Matrix g2 = g1;
    for (auto& x : g2.data()) x *= 2.0;

    auto grads1 = backward(policy, cache, g1);
    auto grads2 = backward(policy, cache, g2);
    for (std::size_t l = 0; l < 2; ++l) {
        for (std::size_t k = 0; k < grads1.weight_grads[l].data().size(); ++k)
            CHECK(grads2.weight_grads[l].data()[k] ==
                  doctest::Approx(2.0 * grads1.weight_grads[l].data()[k]).epsilon(1e-12));
        for (std::size_t o = 0; o < grads1.bias_grads[l].size(); ++o)
            CHECK(grads2.bias_grads[l][o] ==
                  doctest::Approx(2.0 * grads1.bias_grads[l][o]).epsilon(1e-12));
    }
}

TEST_CASE("gradients match central finite differences on a 4-8-2 net") {
    auto policy = random_policy({4, 8, 2}, 33);
    auto target = random_policy({4, 8, 2}, 34);
    auto batch = random_batch(8, 4, 2, 35);
    const double gamma = 0.95;
    const double h = 1e-5;

    // analytic gradient of the mean TD loss
    Matrix states(batch.size(), 4);
    for (std::size_t r = 0; r < batch.size(); ++r)
        for (std::size_t c = 0; c < 4; ++c) states(r, c) = batch[r].state[c];
    auto cache = policy.forward_cached(states);
    auto td = td_loss(policy, target, batch, gamma);
    Matrix loss_grads(batch.size(), 2);
    for (std::size_t r = 0; r < batch.size(); ++r)
        loss_grads(r, static_cast<std::size_t>(batch[r].action)) =
            2.0 * td.td_errors[r] / static_cast<double>(batch.size());
    auto grads = backward(policy, cache, loss_grads);

    std::mt19937_64 rng(36);
    int probes = 0;
    while (probes < 120) {
        std::uniform_int_distribution<std::size_t> layer_pick(0, 1);
        std::size_t l = layer_pick(rng);
        auto& layer = policy.layers()[l];
        bool probe_bias = probes % 5 == 0;
        double analytic;
        double* param;
        if (probe_bias) {
            std::uniform_int_distribution<std::size_t> pick(0, layer.biases.size() - 1);
            std::size_t o = pick(rng);
            param = &layer.biases[o];
            analytic = grads.bias_grads[l][o];
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, layer.weights.data().size() - 1);
            std::size_t k = pick(rng);
            param = &layer.weights.data()[k];
            analytic = grads.weight_grads[l].data()[k];
        }
        double saved = *param;
        *param = saved + h;
        double up = batch_loss(policy, target, batch, gamma);
        *param = saved - h;
        double down = batch_loss(policy, target, batch, gamma);
        *param = saved;
        double numeric = (up - down) / (2.0 * h);

        if (std::abs(numeric) < 1e-8 && std::abs(analytic) < 1e-8) {
            ++probes;  // dead ReLU path on both sides, counts as agreement
            continue;
        }
        double rel = std::abs(analytic - numeric) /
                     std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        CHECK(rel < 1e-4);
        ++probes;
    }
}

TEST_CASE("aggregate_and_step basics") {
    auto policy = random_policy({2, 2}, 5);
    auto before = policy;

    GradientSet zero;
    zero.weight_grads = {Matrix(2, 2)};
    zero.bias_grads = {{0.0, 0.0}};
    zero.sample_count = 4;

    SUBCASE("lr 0 leaves weights unchanged") {
        GradientSet g = zero;
        g.weight_grads[0](0, 0) = 2.0;
        std::vector<GradientSet> grads{g};
        aggregate_and_step(policy, grads, 0.0, 4);
        CHECK(policy == before);
    }

    SUBCASE("empty gradient list rejected") {
        std::vector<GradientSet> grads;
        CHECK_THROWS_AS(aggregate_and_step(policy, grads, 0.1, 4), std::invalid_argument);
    }

    SUBCASE("single sub-batch equals plain SGD") {
        GradientSet g = zero;
        g.weight_grads[0](0, 0) = 4.0;
        g.bias_grads[0][1] = 8.0;
        std::vector<GradientSet> grads{g};
        aggregate_and_step(policy, grads, 0.5, 4);
        CHECK(policy.layers()[0].weights(0, 0) ==
              doctest::Approx(before.layers()[0].weights(0, 0) - 0.5 * 4.0 / 4.0));
        CHECK(policy.layers()[0].biases[1] ==
              doctest::Approx(before.layers()[0].biases[1] - 0.5 * 8.0 / 4.0));
    }
}

TEST_CASE("sub-batch partitions reproduce full-batch training") {
    auto batch = random_batch(16, 4, 2, 50);
    std::vector<MlpPolicy> results;
    for (std::size_t parts : {1u, 2u, 4u}) {
        LearnerConfig config;
        config.layer_dims = {4, 8, 2};
        config.learning_rate = 0.01;
        config.gamma = 0.9;
        config.sub_batches = parts;
        config.seed = 71;
        Learner learner(config);
        TrainBatch tb{batch, {}, parts};
        auto result = learner.train_iteration(tb);
        results.push_back(result.new_weights);
    }
    for (std::size_t v = 1; v < results.size(); ++v) {
        for (std::size_t l = 0; l < results[0].layers().size(); ++l) {
            const auto& a = results[0].layers()[l];
            const auto& b = results[v].layers()[l];
            for (std::size_t k = 0; k < a.weights.data().size(); ++k)
                CHECK(std::abs(a.weights.data()[k] - b.weights.data()[k]) < 1e-10);
            for (std::size_t o = 0; o < a.biases.size(); ++o)
                CHECK(std::abs(a.biases[o] - b.biases[o]) < 1e-10);
        }
    }
}

TEST_CASE("four equal sub-batches match one full batch within 1e-12") {
    auto batch = random_batch(16, 4, 2, 52);
    auto policy = random_policy({4, 8, 2}, 53);
    auto target = random_policy({4, 8, 2}, 54);

    auto grads_for = [&](std::size_t begin, std::size_t count) {
        std::vector<Experience> part(batch.begin() + begin, batch.begin() + begin + count);
        Matrix states(count, 4);
        for (std::size_t r = 0; r < count; ++r)
            for (std::size_t c = 0; c < 4; ++c) states(r, c) = part[r].state[c];
        auto cache = policy.forward_cached(states);
        auto td = td_loss(policy, target, part, 0.9);
        Matrix lg(count, 2);
        for (std::size_t r = 0; r < count; ++r)
            lg(r, static_cast<std::size_t>(part[r].action)) = 2.0 * td.td_errors[r];
        return backward(policy, cache, lg);
    };

    MlpPolicy full = policy;
    std::vector<GradientSet> one{grads_for(0, 16)};
    aggregate_and_step(full, one, 0.05, 16);

    MlpPolicy split = policy;
    std::vector<GradientSet> four;
    for (std::size_t p = 0; p < 4; ++p) four.push_back(grads_for(p * 4, 4));
    aggregate_and_step(split, four, 0.05, 16);

    for (std::size_t l = 0; l < full.layers().size(); ++l) {
        for (std::size_t k = 0; k < full.layers()[l].weights.data().size(); ++k)
            CHECK(std::abs(full.layers()[l].weights.data()[k] -
                           split.layers()[l].weights.data()[k]) < 1e-12);
    }
}

TEST_CASE("identical experiences produce identical priorities") {
    LearnerConfig config;
    config.layer_dims = {2, 4, 2};
    config.seed = 3;
    Learner learner(config);
    auto exp = make_exp({0.3, -0.2}, 1, {0.1, 0.4}, 0.5, false);
    TrainBatch batch{{exp, exp, exp, exp}, {}, 1};
    auto result = learner.train_iteration(batch);
    for (double p : result.new_priorities) {
        CHECK(p == result.new_priorities[0]);
        CHECK(p >= 0.0);
    }
}

TEST_CASE("priorities are |TD| plus the floor") {
    LearnerConfig config;
    config.layer_dims = {1, 1};
    config.seed = 3;
    config.learning_rate = 0.0;
    Learner learner(config);
    auto exp = make_exp({0.0}, 0, {0.0}, 1.0, true);
    TrainBatch batch{{exp}, {}, 1};
    auto result = learner.train_iteration(batch);
    double q0 = learner.policy().layers()[0].biases[0];
    CHECK(result.new_priorities[0] == doctest::Approx(std::abs(q0 - 1.0) + 1e-6));
}

TEST_CASE("loss trends down on a fixed batch") {
    LearnerConfig config;
    config.layer_dims = {3, 8, 2};
    config.learning_rate = 0.02;
    config.gamma = 0.0;  // regression to rewards
    config.sync_period = 1;
    config.seed = 8;
    Learner learner(config);
    auto batch = random_batch(16, 3, 2, 81);

    std::vector<double> losses;
    for (int i = 0; i < 100; ++i) {
        TrainBatch tb{batch, {}, 1};
        losses.push_back(learner.train_iteration(tb).loss);
    }
    int increases = 0;
    for (std::size_t i = 1; i < losses.size(); ++i)
        if (losses[i] > losses[i - 1]) ++increases;
    CHECK(increases <= 5);  // <=5% non-monotone steps
    CHECK(losses.back() < losses.front());
}

TEST_CASE("same seed gives bitwise-identical trajectories") {
    auto batch = random_batch(8, 2, 2, 90);
    auto run = [&batch]() {
        LearnerConfig config;
        config.layer_dims = {2, 4, 2};
        config.learning_rate = 0.01;
        config.seed = 123;
        Learner learner(config);
        for (int i = 0; i < 20; ++i) {
            TrainBatch tb{batch, {}, 1};
            learner.train_iteration(tb);
        }
        return learner.policy();
    };
    CHECK(run() == run());
}

TEST_CASE("target network refreshes every sync_period iterations") {
    LearnerConfig config;
    config.layer_dims = {2, 2};
    config.learning_rate = 0.1;
    config.sync_period = 3;
    config.seed = 5;
    Learner learner(config);
    auto batch = random_batch(4, 2, 2, 91);
    TrainBatch tb{batch, {}, 1};
    learner.train_iteration(tb);
    CHECK_FALSE(learner.policy() == learner.target_policy());
    learner.train_iteration(tb);
    learner.train_iteration(tb);  // third: sync
    CHECK(learner.policy() == learner.target_policy());
}
