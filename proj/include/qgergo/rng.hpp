#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based random streams (Philox4x64-10, Salmon et al. SC'11).
//
// Every normal variate consumed by a simulation is addressed by the tuple
// (seed, member, mode, step).  The pair (seed, member) forms the 128-bit
// Philox key, (step, mode) the counter, so ensemble members can be stepped
// in any order, on any number of workers, and reproduce bit-identical
// noise.  Checkpoint resume only needs the key and the step counter.

namespace qgergo {

struct Philox4x64Block {
    std::array<std::uint64_t, 4> v;
};

namespace detail {

inline void mulhilo64(std::uint64_t a, std::uint64_t b,
                      std::uint64_t& hi, std::uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

} // namespace detail

/// One Philox4x64 block with the standard 10 rounds.
inline Philox4x64Block philox4x64_10(const std::array<std::uint64_t, 4>& counter,
                                     const std::array<std::uint64_t, 2>& key) {
    constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

    std::uint64_t x0 = counter[0], x1 = counter[1], x2 = counter[2], x3 = counter[3];
    std::uint64_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        detail::mulhilo64(kMul0, x0, hi0, lo0);
        detail::mulhilo64(kMul1, x2, hi1, lo1);
        x0 = hi1 ^ x1 ^ k0;
        x1 = lo1;
        x2 = hi0 ^ x3 ^ k1;
        x3 = lo0;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return Philox4x64Block{{x0, x1, x2, x3}};
}

/// Identifies one noise stream: a global seed plus an ensemble member id.
/// Streams with distinct (seed, member) pairs never share Philox keys.
struct RngKey {
    std::uint64_t seed = 0;
    std::uint64_t member = 0;
};

// Domain-separation constants for draws that are not per-member path noise
// (e.g. a random initial condition shared by a whole member group).  They
// live far above any realistic member id.
inline constexpr std::uint64_t kStreamInitialCondition = 0x4000000000000000ULL;

namespace detail {

/// Map a u64 to (0,1]; never returns 0, so log() below is safe.
inline double to_unit_open(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

/// Map a u64 to [0,1).
inline double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

} // namespace detail

/// Standard normal draw addressed by (key, mode, step): one Philox block,
/// Box-Muller on its first two lanes.
inline double standard_normal(const RngKey& key, std::uint64_t mode, std::uint64_t step) {
    const Philox4x64Block blk =
        philox4x64_10({step, mode, 0, 0}, {key.seed, key.member});
    const double u1 = detail::to_unit_open(blk.v[0]);
    const double u2 = detail::to_unit(blk.v[1]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace qgergo
