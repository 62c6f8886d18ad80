#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "drl/mlp.hpp"
#include "drl/replay.hpp"

namespace drl {

// All runtime messages carry a virtual timestamp; real mode leaves it at 0.

// DCQ payload: experiences from one actor, in emission order. episode_reward
// is set when the batch closes an episode.
struct ExperienceBatch {
    int actor_id = 0;
    std::uint64_t seq = 0;
    std::vector<Experience> experiences;
    std::optional<double> episode_reward;
    double stamp = 0.0;
};

// WSQ payload: a full by-value weight snapshot (never a torn mix of versions).
struct WeightSnapshot {
    MlpPolicy policy;
    std::uint64_t version = 0;
    double stamp = 0.0;
};

// RRQ host->RM payload; field use depends on the opcode (see ReplayOpcode).
struct ReplayRequestMsg {
    ReplayOpcode opcode = ReplayOpcode::kSample;
    std::size_t batch_size = 0;                    // Sample
    std::vector<std::size_t> indices;              // Retrieve / Update
    std::vector<double> deltas;                    // Update (priority changes)
    std::vector<double> priorities;                // Insert (absolute), Update write-back
    std::vector<Experience> experiences;           // Insert
    std::vector<std::size_t> avoid_indices;        // Insert: in-training leaf indices
    double stamp = 0.0;
};

// RRQ RM->host payload (Sample and Retrieve reply; Update/Insert are fire-and-forget).
struct ReplayReplyMsg {
    ReplayOpcode opcode = ReplayOpcode::kSample;
    std::vector<std::size_t> indices;
    std::vector<double> priorities;
    std::vector<Experience> experiences;           // filled for Sample
    double stamp = 0.0;
};

// LAQ payload: sampled data for one training iteration.
struct TrainRequestMsg {
    std::vector<std::size_t> indices;
    std::vector<Experience> experiences;
    double stamp = 0.0;
};

// LDQ payload: training done, updated priorities and fresh weights.
struct TrainDoneMsg {
    std::vector<std::size_t> indices;
    std::vector<double> new_priorities;
    MlpPolicy weights;
    std::uint64_t weight_version = 0;
    double loss = 0.0;
    double stamp = 0.0;
};

}  // namespace drl
