#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hdqr {

using NodeId = int;
using EdgeId = int;
using GroupId = int;

// Uniform variates in [0,1) from a named stream. All randomness in the
// library flows through this so that a single variate is consumed per
// decision point (the replay sampling oracle relies on that).
class UniformSource {
public:
    UniformSource() : eng_(0) {}
    explicit UniformSource(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    double next() {
        // 53 random bits -> [0,1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // integer in [0, n)
    int next_int(int n) {
        if (n <= 0) throw std::invalid_argument("next_int: n must be positive");
        int v = static_cast<int>(next() * n);
        return v >= n ? n - 1 : v;
    }

private:
    std::mt19937_64 eng_;
};

// FNV-1a, used to derive independent named streams from one master seed.
inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline UniformSource named_stream(uint64_t master_seed, std::string_view name) {
    return UniformSource(master_seed ^ fnv1a(name));
}

}  // namespace hdqr
