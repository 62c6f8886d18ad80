#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>

#include "drl/env.hpp"
#include "drl/messages.hpp"
#include "drl/mlp.hpp"
#include "drl/queues.hpp"

namespace drl {

// Linear decay from start to end over decay_steps, then flat at end.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.05;
    long decay_steps = 10000;

    double at(long step) const {
        if (decay_steps <= 0) return end;
        double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
        if (frac >= 1.0) return end;
        return start + (end - start) * frac;
    }
};

struct ActorConfig {
    int num_actors = 1;
    EpsilonSchedule epsilon;
    bool poll_weights = true;
    // true: one DCQ message per finished episode; false: one per env step.
    bool batch_per_episode = true;
};

// One policy-inference worker: syncs weights from its WSQ, steps its own
// environment copy with epsilon-greedy actions, and emits experiences to its
// DCQ. Driven by step(); never blocks (a full DCQ pauses the env instead).
class ActorWorker {
public:
    ActorWorker(int id, std::unique_ptr<Environment> env, MlpPolicy initial_policy,
                const ActorConfig& config, std::uint64_t seed,
                BoundedQueue<WeightSnapshot>& wsq, BoundedQueue<ExperienceBatch>& dcq);

    // Returns true if any progress was made (weights synced, env stepped, or
    // batch delivered). stamp is the virtual time to tag emissions with.
    bool step(double stamp = 0.0);

    void request_stop() { stop_.store(true, std::memory_order_relaxed); }
    bool stopped() const { return stop_.load(std::memory_order_relaxed); }

    int id() const { return id_; }
    long total_steps() const { return total_steps_; }
    std::uint64_t batches_emitted() const { return batches_emitted_; }
    std::uint64_t weight_version() const { return weight_version_; }

    // Test hook: observe every emitted experience.
    std::function<void(const Experience&)> on_emit;

private:
    long choose_action(const std::vector<double>& state);
    void begin_episode();

    int id_;
    std::unique_ptr<Environment> env_;
    MlpPolicy policy_;
    ActorConfig config_;
    std::mt19937_64 rng_;
    BoundedQueue<WeightSnapshot>& wsq_;
    BoundedQueue<ExperienceBatch>& dcq_;

    std::vector<double> state_;
    bool episode_active_ = false;
    double episode_reward_ = 0.0;
    std::vector<Experience> pending_;      // experiences not yet packaged
    std::optional<ExperienceBatch> outbox_;  // packaged batch awaiting queue space
    long total_steps_ = 0;
    std::uint64_t batches_emitted_ = 0;
    std::uint64_t weight_version_ = 0;
    std::atomic<bool> stop_{false};
};

}  // namespace drl
