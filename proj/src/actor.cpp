#include "drl/actor.hpp"

#include <utility>

namespace drl {

ActorWorker::ActorWorker(int id, std::unique_ptr<Environment> env, MlpPolicy initial_policy,
                         const ActorConfig& config, std::uint64_t seed,
                         BoundedQueue<WeightSnapshot>& wsq, BoundedQueue<ExperienceBatch>& dcq)
    : id_(id),
      env_(std::move(env)),
      policy_(std::move(initial_policy)),
      config_(config),
      rng_(seed),
      wsq_(wsq),
      dcq_(dcq) {}

long ActorWorker::choose_action(const std::vector<double>& state) {
    double eps = config_.epsilon.at(total_steps_);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng_) < eps) {
        std::uniform_int_distribution<long> pick(0, static_cast<long>(env_->action_count()) - 1);
        return pick(rng_);
    }
    Matrix row(1, state.size());
    for (std::size_t c = 0; c < state.size(); ++c) row(0, c) = state[c];
    Matrix q = policy_.forward(row);
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.cols(); ++a)
        if (q(0, a) > q(0, best)) best = a;
    return static_cast<long>(best);
}

void ActorWorker::begin_episode() {
    state_ = env_->reset(rng_);
    episode_active_ = true;
    episode_reward_ = 0.0;
}

bool ActorWorker::step(double stamp) {
    if (stopped()) return false;

    bool progressed = false;
    if (config_.poll_weights) {
        // Keep only the freshest snapshot.
        while (auto snap = wsq_.try_pop()) {
            policy_ = std::move(snap->policy);
            weight_version_ = snap->version;
            progressed = true;
        }
    }

    if (outbox_) {
        if (!dcq_.try_push(std::move(*outbox_))) return progressed;  // backpressure
        outbox_.reset();
        ++batches_emitted_;
        progressed = true;
    }

    if (!episode_active_) begin_episode();

    long action = choose_action(state_);
    StepResult sr = env_->step(action);
    ++total_steps_;
    episode_reward_ += sr.reward;

    Experience exp{state_, action, sr.next_state, sr.reward, sr.done};
    if (on_emit) on_emit(exp);
    pending_.push_back(std::move(exp));
    state_ = sr.next_state;

    bool flush = sr.done || !config_.batch_per_episode;
    if (flush) {
        ExperienceBatch batch;
        batch.actor_id = id_;
        batch.seq = batches_emitted_;
        batch.experiences = std::move(pending_);
        pending_.clear();
        if (sr.done) {
            batch.episode_reward = episode_reward_;
            episode_active_ = false;
        }
        batch.stamp = stamp;
        if (dcq_.try_push(std::move(batch))) {
            ++batches_emitted_;
        } else {
            // Queue full; hold the batch and retry next step.
            outbox_ = std::move(batch);
        }
    }
    return true;
}

}  // namespace drl
