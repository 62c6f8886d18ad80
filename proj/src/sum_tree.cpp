#include "drl/sum_tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "drl/errors.hpp"

namespace drl {

std::size_t SumTree::depth_for(std::size_t capacity, unsigned fanout) {
    std::size_t depth = 0;
    std::size_t leaves = 1;
    while (leaves < capacity) {
        leaves *= fanout;
        ++depth;
    }
    return depth;
}

SumTree::SumTree(std::size_t capacity, unsigned fanout)
    : capacity_(capacity), fanout_(fanout) {
    if (capacity < 1) throw std::invalid_argument("sum tree capacity must be >= 1");
    if (fanout < 2) throw std::invalid_argument("sum tree fanout must be >= 2");
    depth_ = depth_for(capacity, fanout);
    levels_.resize(depth_ + 1);
    std::size_t width = 1;
    for (std::size_t level = 0; level <= depth_; ++level) {
        levels_[level].assign(width, 0.0);
        width *= fanout_;
    }
}

double SumTree::priority_at(std::size_t leaf) const {
    if (leaf >= capacity_)
        throw std::invalid_argument("leaf index " + std::to_string(leaf) + " out of range");
    return levels_[depth_][leaf];
}

std::vector<double> SumTree::retrieve(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(priority_at(i));
    return out;
}

void SumTree::apply_delta(std::size_t leaf, double delta) {
    std::size_t node = leaf;
    for (std::size_t level = depth_ + 1; level-- > 0;) {
        levels_[level][node] += delta;
        node /= fanout_;
    }
}

void SumTree::update(std::span<const std::size_t> indices, std::span<const double> deltas) {
    if (indices.size() != deltas.size())
        throw std::invalid_argument("update: indices/deltas length mismatch");

    // Validate the whole batch (duplicates accumulate in order) before
    // mutating, so a bad batch leaves the tree untouched.
    std::unordered_map<std::size_t, double> staged;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        std::size_t leaf = indices[k];
        if (leaf >= capacity_)
            throw std::invalid_argument("update: leaf index " + std::to_string(leaf) +
                                        " out of range");
        auto [it, inserted] = staged.try_emplace(leaf, levels_[depth_][leaf]);
        it->second += deltas[k];
        if (it->second < 0.0)
            throw std::invalid_argument("update: priority at leaf " + std::to_string(leaf) +
                                        " would become negative (" +
                                        std::to_string(it->second) + ")");
    }

    for (std::size_t k = 0; k < indices.size(); ++k) apply_delta(indices[k], deltas[k]);

    updates_since_rebuild_ += indices.size();
    if (updates_since_rebuild_ >= kRebuildPeriod) rebuild();
}

std::size_t SumTree::find_prefix(double x) const {
    std::size_t node = 0;
    double target = x;
    for (std::size_t level = 0; level < depth_; ++level) {
        const auto& children = levels_[level + 1];
        std::size_t first = node * fanout_;
        std::size_t chosen = first + fanout_ - 1;  // fall through to last child on fp drift
        double cumulative = 0.0;
        for (std::size_t c = first; c < first + fanout_; ++c) {
            cumulative += children[c];
            if (cumulative >= target) {
                chosen = c;
                target -= cumulative - children[c];  // prefix before the chosen child
                break;
            }
        }
        node = chosen;
    }
    return node;
}

std::size_t SumTree::sample_one(double x) const {
    std::size_t leaf = find_prefix(x);
    if (leaf < capacity_ && levels_[depth_][leaf] > 0.0) return leaf;
    // Landed on a padded or zero leaf (x == 0 or float boundary): clamp to the
    // nearest live leaf, preferring the last one before the landing point.
    std::size_t start = std::min(leaf, capacity_ - 1);
    for (std::size_t i = start + 1; i-- > 0;) {
        if (levels_[depth_][i] > 0.0) return i;
    }
    for (std::size_t i = start + 1; i < capacity_; ++i) {
        if (levels_[depth_][i] > 0.0) return i;
    }
    throw RuntimeFailure("sample: no live leaf with positive priority");
}

std::vector<std::pair<std::size_t, double>> SumTree::sample(std::size_t batch_size,
                                                            std::mt19937_64& rng) const {
    if (!(total() > 0.0))
        throw RuntimeFailure("sample: empty buffer (total priority is zero)");
    std::uniform_real_distribution<double> dist(0.0, total());
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(batch_size);
    for (std::size_t k = 0; k < batch_size; ++k) {
        std::size_t leaf = sample_one(dist(rng));
        out.emplace_back(leaf, levels_[depth_][leaf]);
    }
    return out;
}

double SumTree::max_leaf_priority() const {
    const auto& leaves = levels_[depth_];
    double best = 0.0;
    for (std::size_t i = 0; i < capacity_; ++i) best = std::max(best, leaves[i]);
    return best;
}

void SumTree::rebuild() {
    for (std::size_t level = depth_; level-- > 0;) {
        auto& parents = levels_[level];
        const auto& children = levels_[level + 1];
        for (std::size_t p = 0; p < parents.size(); ++p) {
            double sum = 0.0;
            for (std::size_t c = p * fanout_; c < (p + 1) * fanout_; ++c) sum += children[c];
            parents[p] = sum;
        }
    }
    updates_since_rebuild_ = 0;
}

double SumTree::max_parent_child_mismatch() const {
    double worst = 0.0;
    for (std::size_t level = 0; level < depth_; ++level) {
        const auto& parents = levels_[level];
        const auto& children = levels_[level + 1];
        for (std::size_t p = 0; p < parents.size(); ++p) {
            double sum = 0.0;
            for (std::size_t c = p * fanout_; c < (p + 1) * fanout_; ++c) sum += children[c];
            double rel = std::abs(parents[p] - sum) / std::max(std::abs(parents[p]), 1.0);
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace drl
