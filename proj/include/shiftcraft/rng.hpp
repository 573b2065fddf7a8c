#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace shiftcraft {

// SplitMix64 step. All randomness in the project flows through this one
// generator so that identical seeds give identical results on every platform:
// uniform doubles are built from the top 53 bits, bounded ints via the
// 128-bit multiply trick, normals via Box-Muller. No std::<distribution> is
// used anywhere (their output is implementation-defined).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// FNV-1a, used to fold string ids (image ids, stage tags) into seed words.
inline std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

// Derives an independent child seed from (base, words...). Used to give every
// item/stage its own stream, e.g. derive_seed(master, {hash_str("aug"), step,
// slot}), so parallel or reordered processing cannot change results.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = mix64(base + 0x9E3779B97F4A7C15ull);
    for (std::uint64_t w : words) {
        h = mix64(h ^ (w + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)));
    }
    return h;
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be positive.
    int uniform_int(int n) {
        return static_cast<int>(
            (static_cast<unsigned __int128>(next_u64()) * static_cast<std::uint64_t>(n)) >> 64);
    }

    // Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(T* first, int n) {
        for (int i = n - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            T tmp = first[i];
            first[i] = first[j];
            first[j] = tmp;
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace shiftcraft
