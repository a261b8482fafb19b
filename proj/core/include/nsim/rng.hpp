#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nsim {

// splitmix64 finalizer. Used both for seed derivation and for stateless
// per-key draws (hash a key, treat the result as one uniform u64).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

inline std::uint64_t hash_str(std::string_view s) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Converts a u64 to a double in [0,1) using the top 53 bits.
inline double to_unit_double(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

// Deterministic random stream around std::mt19937_64. The engine's output
// sequence is fixed by the standard; the distribution helpers below avoid
// std::uniform_*_distribution, whose outputs are implementation-defined,
// so streams are bit-reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform double in [0,1).
    double next_double() { return to_unit_double(next_u64()); }

    /// Uniform integer in [0,n). n must be positive.
    std::uint64_t next_below(std::uint64_t n) {
        // rejection below 2^64 mod n keeps the draw unbiased
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

    bool bernoulli(double p) { return next_double() < p; }

private:
    std::mt19937_64 eng_;
};

// Derives a seed for the (tag, index) sub-stream of a master seed.
// Distinct tags and indices give statistically independent streams;
// the same inputs always give the same stream.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view tag,
                                 std::uint64_t index) {
    std::uint64_t h = mix64(master_seed);
    h = hash_combine(h, hash_str(tag));
    h = hash_combine(h, index);
    return h;
}

inline Rng derive_stream(std::uint64_t master_seed, std::string_view tag,
                         std::uint64_t index) {
    return Rng(derive_seed(master_seed, tag, index));
}

}  // namespace nsim
