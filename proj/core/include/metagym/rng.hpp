#pragma once

#include <cstdint>

namespace metagym {

// splitmix64 finalizer: constant-multiply / xor-shift avalanche.
// Every piece of randomness in the engine flows through this mixer so
// generated artifacts are bit-identical across platforms and runs.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic 64-bit stream (splitmix64). Not cryptographic.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). bound >= 1. Multiply-shift reduction; the
    // O(2^-64) bias is irrelevant here, determinism is what matters.
    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // Uniform real in [0, 1) with 53 random bits.
    double unit_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return unit_real() < p; }

private:
    std::uint64_t state_;
};

// Per-instance seed derivation: mix the master seed with the task tag,
// curriculum level and instance index through three rounds of mix64.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t task_tag,
                                    std::uint64_t level, std::uint64_t index) {
    std::uint64_t s = mix64(master ^ (0xd6e8feb86659fd93ULL * (task_tag + 1)));
    s = mix64(s ^ (0xa24baed4963ee407ULL * (level + 1)));
    return mix64(s ^ (0x9fb21c651e98df25ULL * (index + 1)));
}

} // namespace metagym
