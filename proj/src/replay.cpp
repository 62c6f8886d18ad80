#include "drl/replay.hpp"

#include <stdexcept>
#include <string>

#include "drl/errors.hpp"

namespace drl {

const Experience& DataStorage::read(std::size_t index) const {
    if (index >= slots_.size())
        throw std::invalid_argument("storage read: index " + std::to_string(index) +
                                    " out of range");
    return slots_[index];
}

void DataStorage::write(std::size_t index, Experience exp) {
    if (index >= slots_.size())
        throw std::invalid_argument("storage write: index " + std::to_string(index) +
                                    " out of range");
    slots_[index] = std::move(exp);
}

ReplayManager::ReplayManager(std::size_t capacity, unsigned fanout, ReplayMode mode)
    : tree_(capacity, fanout), storage_(capacity), mode_(mode), occupied_(capacity, false) {}

double ReplayManager::default_insert_priority() const {
    if (mode_ == ReplayMode::kUniform) return 1.0;
    double best = tree_.max_leaf_priority();
    return best > 0.0 ? best : 1.0;
}

std::vector<std::size_t> ReplayManager::insert(std::span<const Experience> experiences,
                                               std::span<const double> priorities,
                                               const std::unordered_set<std::size_t>& avoid) {
    if (experiences.size() != priorities.size())
        throw std::invalid_argument("insert: experiences/priorities length mismatch");
    if (avoid.size() >= capacity())
        throw RuntimeFailure("insert: every index is in flight, nothing writable");

    std::vector<std::size_t> written;
    written.reserve(experiences.size());
    for (std::size_t k = 0; k < experiences.size(); ++k) {
        while (avoid.contains(cursor_)) cursor_ = (cursor_ + 1) % capacity();
        std::size_t index = cursor_;
        cursor_ = (cursor_ + 1) % capacity();

        double priority = mode_ == ReplayMode::kUniform ? 1.0 : priorities[k];
        if (priority < 0.0) throw std::invalid_argument("insert: negative priority");

        // Retrieval of the old priority followed by an update of the change.
        std::size_t idx[1] = {index};
        double old_priority = tree_.retrieve(idx)[0];
        double delta[1] = {priority - old_priority};
        tree_.update(idx, delta);

        if (!occupied_[index]) {
            occupied_[index] = true;
            ++live_;
        }
        storage_.write(index, experiences[k]);
        written.push_back(index);
    }
    return written;
}

std::vector<double> ReplayManager::retrieve(std::span<const std::size_t> indices) const {
    return tree_.retrieve(indices);
}

void ReplayManager::update(std::span<const std::size_t> indices,
                           std::span<const double> deltas) {
    if (mode_ == ReplayMode::kUniform) return;
    tree_.update(indices, deltas);
}

void ReplayManager::update_priorities(std::span<const std::size_t> indices,
                                      std::span<const double> new_priorities) {
    if (mode_ == ReplayMode::kUniform) return;
    if (indices.size() != new_priorities.size())
        throw std::invalid_argument("update_priorities: length mismatch");
    // Sampling with replacement repeats indices; the last write-back for an
    // index wins, applied once (a delta per duplicate would compound).
    std::vector<std::size_t> unique;
    std::vector<double> final_value;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        bool seen = false;
        for (std::size_t u = 0; u < unique.size(); ++u) {
            if (unique[u] == indices[k]) {
                final_value[u] = new_priorities[k];
                seen = true;
                break;
            }
        }
        if (!seen) {
            unique.push_back(indices[k]);
            final_value.push_back(new_priorities[k]);
        }
    }
    std::vector<double> old = tree_.retrieve(unique);
    std::vector<double> deltas(unique.size());
    for (std::size_t k = 0; k < unique.size(); ++k) deltas[k] = final_value[k] - old[k];
    tree_.update(unique, deltas);
}

std::vector<std::pair<std::size_t, double>> ReplayManager::sample(std::size_t batch_size,
                                                                  std::mt19937_64& rng) const {
    return tree_.sample(batch_size, rng);
}

SampleBatch ReplayManager::sample_batch_experiences(std::size_t batch_size,
                                                    std::mt19937_64& rng) const {
    SampleBatch batch;
    auto drawn = tree_.sample(batch_size, rng);
    batch.indices.reserve(batch_size);
    batch.priorities.reserve(batch_size);
    batch.experiences.reserve(batch_size);
    for (auto [index, priority] : drawn) {
        batch.indices.push_back(index);
        batch.priorities.push_back(priority);
        batch.experiences.push_back(storage_.read(index));
    }
    return batch;
}

}  // namespace drl
