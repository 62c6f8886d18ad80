#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <unordered_set>
#include <vector>

#include "drl/sum_tree.hpp"

namespace drl {

// One transition tuple. state/next_state share the environment's state shape.
struct Experience {
    std::vector<double> state;
    long action = 0;
    std::vector<double> next_state;
    double reward = 0.0;
    bool done = false;

    friend bool operator==(const Experience&, const Experience&) = default;
};

enum class ReplayMode { kPrioritized, kUniform };

enum class ReplayOpcode { kSample, kRetrieve, kUpdate, kInsert };

// Raw experience array indexed by sum-tree leaf indices.
class DataStorage {
public:
    explicit DataStorage(std::size_t capacity) : slots_(capacity) {}

    std::size_t capacity() const { return slots_.size(); }
    const Experience& read(std::size_t index) const;
    void write(std::size_t index, Experience exp);

private:
    std::vector<Experience> slots_;
};

struct SampleBatch {
    std::vector<std::size_t> indices;
    std::vector<double> priorities;
    std::vector<Experience> experiences;
};

// Prioritized replay buffer: sum tree over priorities plus the experience
// storage, written through a circular cursor. Single-owner; in the runtime all
// access is serialized through the replay worker's request queue.
class ReplayManager {
public:
    ReplayManager(std::size_t capacity, unsigned fanout,
                  ReplayMode mode = ReplayMode::kPrioritized);

    std::size_t capacity() const { return storage_.capacity(); }
    std::size_t size() const { return live_; }           // live experiences
    std::size_t cursor() const { return cursor_; }
    ReplayMode mode() const { return mode_; }
    const SumTree& tree() const { return tree_; }
    DataStorage& storage() { return storage_; }

    // Priority for fresh experiences: current max leaf priority, or 1.0 into
    // an empty buffer, so nothing starves before its first training pass.
    // Uniform mode always returns 1.0.
    double default_insert_priority() const;

    // Writes experiences at the cursor (wrapping), advancing past any index in
    // `avoid` without writing it. Tree change is a retrieval of the old
    // priority followed by an update with the difference. Returns the indices
    // written. Throws RuntimeFailure if avoid covers the whole capacity.
    std::vector<std::size_t> insert(std::span<const Experience> experiences,
                                    std::span<const double> priorities,
                                    const std::unordered_set<std::size_t>& avoid = {});

    std::vector<double> retrieve(std::span<const std::size_t> indices) const;

    // Delta update on the tree. Ignored in uniform mode (priorities stay equal).
    void update(std::span<const std::size_t> indices, std::span<const double> deltas);

    // Absolute-priority form used for the learner write-back: delta = new - old.
    void update_priorities(std::span<const std::size_t> indices,
                           std::span<const double> new_priorities);

    std::vector<std::pair<std::size_t, double>> sample(std::size_t batch_size,
                                                       std::mt19937_64& rng) const;

    // Batched priority sampling plus the storage reads.
    SampleBatch sample_batch_experiences(std::size_t batch_size, std::mt19937_64& rng) const;

private:
    SumTree tree_;
    DataStorage storage_;
    ReplayMode mode_;
    std::size_t cursor_ = 0;
    std::size_t live_ = 0;
    std::vector<bool> occupied_;
};

}  // namespace drl
