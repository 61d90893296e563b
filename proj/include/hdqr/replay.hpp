#pragma once

#include <cstddef>
#include <vector>

#include "hdqr/common.hpp"

namespace hdqr {

struct Transition {
    std::vector<double> s;
    int a = 0;
    double r = 0;
    std::vector<double> s_next;
    bool terminal = false;
    // live-candidate counts, used for action masking
    int n_actions = 0;
    int n_actions_next = 0;
};

struct SampleEntry {
    uint64_t index = 0;  // global insertion index
    Transition transition;
    double probability = 0;  // P_i
    double weight = 0;       // normalized IS weight
};

struct SampledBatch {
    std::vector<SampleEntry> entries;
};

// Binary indexed sum tree over leaf values; leaf count rounded up to a
// power of two.
class SumTree {
public:
    explicit SumTree(size_t capacity);

    void set(size_t leaf, double value);
    double value(size_t leaf) const { return tree_[base_ + leaf]; }
    double total() const { return tree_[1]; }

    // Leaf holding the given cumulative mass in [0, total).
    size_t find(double mass) const;

    size_t leaf_count() const { return base_; }

private:
    size_t base_;
    std::vector<double> tree_;
};

// Proportional prioritized replay memory. FIFO ring of capacity M; priorities
// p_i = |delta_i| + eps stored as p_i^alpha in the sum structure. Sampling
// draws one uniform variate per entry so a linear-scan reference walk over the
// same variates selects identical indices.
class ReplayMemory {
public:
    // IS-weight normalization scope: maximum over the sampled batch
    // (default) or over the whole live memory.
    enum class IsNorm { BatchMax, MemoryMax };

    ReplayMemory(size_t capacity, double alpha, double min_priority = 0.01,
                 bool use_tree = true);

    void set_is_norm(IsNorm n) { is_norm_ = n; }

    // Stored with priority = running max over the memory's lifetime
    // (min_priority when nothing was ever stored). Returns the global
    // insertion index.
    uint64_t store(Transition tr);

    SampledBatch sample(size_t m, double beta, UniformSource& rng);

    // priority <- |td_error| + min_priority. Stale (evicted) indices are
    // counted and ignored.
    void update_priority(uint64_t index, double td_error);

    size_t size() const { return size_; }
    size_t capacity() const { return capacity_; }
    double alpha() const { return alpha_; }
    double min_priority() const { return min_priority_; }
    double max_priority() const { return max_priority_; }
    uint64_t stale_updates() const { return stale_updates_; }

    bool is_live(uint64_t index) const {
        return index < inserted_ && index + size_ >= inserted_;
    }
    double priority_of(uint64_t index) const;
    double total_mass() const;  // sum of p_i^alpha over live entries

private:
    size_t slot_of(uint64_t index) const { return static_cast<size_t>(index % capacity_); }
    size_t find_linear(double mass) const;

    size_t capacity_;
    double alpha_;
    double min_priority_;
    bool use_tree_;
    std::vector<Transition> ring_;
    std::vector<double> priority_;  // raw p_i per slot
    SumTree tree_;                  // p_i^alpha per slot
    IsNorm is_norm_ = IsNorm::BatchMax;
    uint64_t inserted_ = 0;
    size_t size_ = 0;
    double max_priority_;
    uint64_t stale_updates_ = 0;
};

struct BetaSchedule {
    double beta_start = 0.4;
    double beta_end = 1.0;
    long horizon = 1;

    double at(long t) const;
};

}  // namespace hdqr
