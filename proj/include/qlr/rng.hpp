#pragma once

#include <cstdint>

namespace qlr {

// Philox4x32-10 counter-based generator. Draws are addressed by (key, counter)
// so shot i of channel c always sees the same numbers no matter which thread
// evaluates it.
namespace detail {

inline void philox_round(uint32_t ctr[4], const uint32_t key[2]) {
    constexpr uint64_t M0 = 0xD2511F53ull;
    constexpr uint64_t M1 = 0xCD9E8D57ull;
    const uint64_t p0 = M0 * ctr[0];
    const uint64_t p1 = M1 * ctr[2];
    const uint32_t c0 = static_cast<uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0];
    const uint32_t c1 = static_cast<uint32_t>(p1);
    const uint32_t c2 = static_cast<uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1];
    const uint32_t c3 = static_cast<uint32_t>(p0);
    ctr[0] = c0;
    ctr[1] = c1;
    ctr[2] = c2;
    ctr[3] = c3;
}

inline void philox4x32_10(uint32_t ctr[4], uint32_t k0, uint32_t k1) {
    uint32_t key[2] = {k0, k1};
    for (int round = 0; round < 10; ++round) {
        philox_round(ctr, key);
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
    }
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace detail

class CounterRng {
  public:
    CounterRng(uint64_t seed, uint64_t stream = 0) {
        const uint64_t mixed = detail::splitmix64(seed ^ detail::splitmix64(stream + 0x51ED2701ull));
        key0_ = static_cast<uint32_t>(mixed);
        key1_ = static_cast<uint32_t>(mixed >> 32);
    }

    // 64 random bits for counter value `idx`, subsequence `sub`
    uint64_t bits_at(uint64_t idx, uint32_t sub = 0) const {
        uint32_t ctr[4] = {static_cast<uint32_t>(idx), static_cast<uint32_t>(idx >> 32), sub, 0u};
        detail::philox4x32_10(ctr, key0_, key1_);
        return (static_cast<uint64_t>(ctr[1]) << 32) | ctr[0];
    }

    // uniform in [0, 1)
    double uniform_at(uint64_t idx, uint32_t sub = 0) const {
        return static_cast<double>(bits_at(idx, sub) >> 11) * 0x1.0p-53;
    }

  private:
    uint32_t key0_;
    uint32_t key1_;
};

// sequential adapter for code that consumes an ordered stream of uniforms
class RngStream {
  public:
    explicit RngStream(CounterRng rng) : rng_(rng) {}
    RngStream(uint64_t seed, uint64_t stream = 0) : rng_(seed, stream) {}

    double next() { return rng_.uniform_at(n_++); }
    uint64_t next_bits() { return rng_.bits_at(n_++); }

  private:
    CounterRng rng_;
    uint64_t n_ = 0;
};

} // namespace qlr
