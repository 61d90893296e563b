#include "hdqr/replay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdqr {

namespace {
size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}
}  // namespace

SumTree::SumTree(size_t capacity) : base_(next_pow2(std::max<size_t>(capacity, 1))) {
    tree_.assign(2 * base_, 0.0);
}

void SumTree::set(size_t leaf, double value) {
    size_t i = base_ + leaf;
    tree_[i] = value;
    for (i >>= 1; i >= 1; i >>= 1) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

size_t SumTree::find(double mass) const {
    size_t i = 1;
    while (i < base_) {
        double left = tree_[2 * i];
        if (mass < left) {
            i = 2 * i;
        } else {
            mass -= left;
            i = 2 * i + 1;
        }
    }
    size_t leaf = i - base_;
    // numeric guard: never land on an empty leaf
    while (leaf > 0 && tree_[base_ + leaf] == 0.0) --leaf;
    return leaf;
}

ReplayMemory::ReplayMemory(size_t capacity, double alpha, double min_priority, bool use_tree)
    : capacity_(capacity),
      alpha_(alpha),
      min_priority_(min_priority),
      use_tree_(use_tree),
      ring_(capacity),
      priority_(capacity, 0.0),
      tree_(capacity),
      max_priority_(min_priority) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    if (min_priority <= 0) throw std::invalid_argument("min_priority must be positive");
}

uint64_t ReplayMemory::store(Transition tr) {
    size_t slot = slot_of(inserted_);
    ring_[slot] = std::move(tr);
    priority_[slot] = max_priority_;
    tree_.set(slot, std::pow(max_priority_, alpha_));
    uint64_t index = inserted_++;
    if (size_ < capacity_) ++size_;
    return index;
}

size_t ReplayMemory::find_linear(double mass) const {
    size_t last = 0;
    for (size_t i = 0; i < capacity_; ++i) {
        double v = tree_.value(i);
        if (v == 0.0) continue;
        if (mass < v) return i;
        mass -= v;
        last = i;
    }
    return last;
}

SampledBatch ReplayMemory::sample(size_t m, double beta, UniformSource& rng) {
    if (size_ < m) throw std::runtime_error("replay memory has fewer entries than batch size");
    if (beta < 0 || beta > 1) throw std::invalid_argument("beta outside [0,1]");

    double total = tree_.total();
    SampledBatch batch;
    batch.entries.reserve(m);
    double max_w = 0.0;
    for (size_t j = 0; j < m; ++j) {
        double mass = rng.next() * total;
        size_t slot = use_tree_ ? tree_.find(mass) : find_linear(mass);
        SampleEntry e;
        // recover the global index of this slot
        uint64_t base = inserted_ - size_;
        uint64_t idx = base + ((slot + capacity_ - slot_of(base)) % capacity_);
        e.index = idx;
        e.transition = ring_[slot];
        e.probability = tree_.value(slot) / total;
        e.weight = std::pow(static_cast<double>(size_) * e.probability, -beta);
        max_w = std::max(max_w, e.weight);
        batch.entries.push_back(std::move(e));
    }
    if (is_norm_ == IsNorm::MemoryMax) {
        double min_v = 0.0;
        for (size_t i = 0; i < capacity_; ++i) {
            double v = tree_.value(i);
            if (v > 0.0 && (min_v == 0.0 || v < min_v)) min_v = v;
        }
        max_w = std::pow(static_cast<double>(size_) * (min_v / total), -beta);
    }
    for (auto& e : batch.entries) e.weight /= max_w;
    return batch;
}

void ReplayMemory::update_priority(uint64_t index, double td_error) {
    if (!is_live(index)) {
        ++stale_updates_;
        return;
    }
    double p = std::abs(td_error) + min_priority_;
    size_t slot = slot_of(index);
    priority_[slot] = p;
    tree_.set(slot, std::pow(p, alpha_));
    max_priority_ = std::max(max_priority_, p);
}

double ReplayMemory::priority_of(uint64_t index) const {
    if (!is_live(index)) throw std::out_of_range("stale replay index");
    return priority_[slot_of(index)];
}

double ReplayMemory::total_mass() const { return tree_.total(); }

double BetaSchedule::at(long t) const {
    if (t <= 0) return beta_start;
    if (t >= horizon) return beta_end;
    return beta_start + (beta_end - beta_start) * (static_cast<double>(t) / horizon);
}

}  // namespace hdqr
