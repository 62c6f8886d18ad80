#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace drl {

// N-ary sum tree over per-experience priorities. Leaves hold P(i); every
// internal node holds the sum of its children, so prefix-sum sampling is a
// root-to-leaf walk of depth ceil(log_F(capacity)).
//
// Parent sums are maintained incrementally (O(depth) per update) and rebuilt
// from the leaves every kRebuildPeriod leaf updates to bound floating-point
// drift.
class SumTree {
public:
    // capacity >= 1, fanout >= 2. All priorities start at zero. Leaf count is
    // fanout^depth >= capacity; leaves at index >= capacity stay zero forever.
    SumTree(std::size_t capacity, unsigned fanout);

    std::size_t capacity() const { return capacity_; }
    unsigned fanout() const { return fanout_; }
    // Number of internal levels between root and leaf level. 0 means the
    // single leaf is also the root.
    std::size_t depth() const { return depth_; }
    std::size_t leaf_count() const { return levels_.back().size(); }

    double total() const { return levels_.front().front(); }

    double priority_at(std::size_t leaf) const;
    std::vector<double> retrieve(std::span<const std::size_t> indices) const;

    // Adds deltas[k] to leaf indices[k] and to every ancestor. Duplicate
    // indices within one batch accumulate. Throws std::invalid_argument if an
    // index is out of range or any intermediate leaf value would go negative;
    // the tree is untouched on error.
    void update(std::span<const std::size_t> indices, std::span<const double> deltas);

    // Raw prefix-sum descent: returns the leaf index the traversal lands on
    // for target x, i.e. min i with sum_{j<=i} P(j) >= x. No clamping; may
    // land on a zero or padded leaf if x is 0 or at the float boundary.
    std::size_t find_prefix(double x) const;

    // find_prefix followed by the live-leaf clamp: if the walk lands on a
    // padded or zero leaf, back up to the nearest preceding live leaf (or
    // forward if none precede). Requires total() > 0.
    std::size_t sample_one(double x) const;

    // batch_size independent draws x ~ U[0, total). Throws drl::RuntimeFailure
    // (empty-buffer) when total() == 0.
    std::vector<std::pair<std::size_t, double>> sample(std::size_t batch_size,
                                                       std::mt19937_64& rng) const;

    // Max priority over live leaves [0, capacity). 0 for an all-zero tree.
    double max_leaf_priority() const;

    // Recompute every internal node from the leaves.
    void rebuild();

    // Largest |parent - sum(children)| / max(|parent|, 1) over all internal
    // nodes. Diagnostic for the parent-sum invariant.
    double max_parent_child_mismatch() const;

    static std::size_t depth_for(std::size_t capacity, unsigned fanout);

    static constexpr std::uint64_t kRebuildPeriod = 1'000'000;

private:
    std::size_t capacity_;
    unsigned fanout_;
    std::size_t depth_;
    // levels_[0] is the root (size 1), levels_[depth_] the leaves.
    std::vector<std::vector<double>> levels_;
    std::uint64_t updates_since_rebuild_ = 0;

    void apply_delta(std::size_t leaf, double delta);
};

}  // namespace drl
