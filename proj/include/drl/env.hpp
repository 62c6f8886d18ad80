#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace drl {

struct StepResult {
    std::vector<double> next_state;
    double reward = 0.0;
    bool done = false;
};

// Episodic environment with discrete actions. step() after done is rejected
// until the next reset().
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::size_t state_dim() const = 0;
    virtual std::size_t action_count() const = 0;
    virtual long episode_limit() const = 0;
    virtual long step_count() const = 0;
    virtual bool is_done() const = 0;

    virtual std::vector<double> reset(std::mt19937_64& rng) = 0;
    virtual StepResult step(long action) = 0;
};

// Pole-balance task with the classic cart-pole constants:
//   gravity 9.8, cart mass 1.0, pole mass 0.1, half-length 0.5, force 10 N,
//   Euler integration at tau = 0.02 s; episode ends when |x| > 2.4,
//   |theta| > 0.2095 rad, or the step limit is hit. Reward 1 per step.
// Initial state components drawn uniformly from [-0.05, 0.05].
class CartPoleLite : public Environment {
public:
    explicit CartPoleLite(long episode_limit = 200);

    std::size_t state_dim() const override { return 4; }
    std::size_t action_count() const override { return 2; }
    long episode_limit() const override { return episode_limit_; }
    long step_count() const override { return step_count_; }
    bool is_done() const override { return done_; }

    std::vector<double> reset(std::mt19937_64& rng) override;
    StepResult step(long action) override;

private:
    long episode_limit_;
    long step_count_ = 0;
    bool done_ = true;
    std::vector<double> state_{0, 0, 0, 0};  // x, x_dot, theta, theta_dot
};

// 1-D corridor of 9 cells; the agent starts in the middle, action 0 moves
// left, 1 moves right. Reward +1 on reaching the right end (terminal).
// State is the position scaled to [0, 1].
class LineWorld : public Environment {
public:
    explicit LineWorld(long episode_limit = 50);

    std::size_t state_dim() const override { return 1; }
    std::size_t action_count() const override { return 2; }
    long episode_limit() const override { return episode_limit_; }
    long step_count() const override { return step_count_; }
    bool is_done() const override { return done_; }

    std::vector<double> reset(std::mt19937_64& rng) override;
    StepResult step(long action) override;

    static constexpr int kCells = 9;

private:
    long episode_limit_;
    long step_count_ = 0;
    bool done_ = true;
    int position_ = kCells / 2;
};

// Factory for the built-in benchmarks: "cartpole-lite" and "line-world".
// episode_limit 0 keeps each benchmark's default.
std::unique_ptr<Environment> make_environment(const std::string& name, long episode_limit = 0);

}  // namespace drl
