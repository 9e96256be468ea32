#pragma once

// Counter-based random streams. Every draw is addressed by
// (master_seed, trajectory, step, walker, channel, index), so results are
// independent of evaluation order and worker scheduling. The generator is a
// splitmix64 finalizer chain over the address words; outcome, bath and policy
// draws live on disjoint channel ids.

#include <cmath>
#include <cstdint>

namespace steersim {

namespace rng_detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double to_unit_open(std::uint64_t x) {
    // (0,1): 53-bit mantissa, shifted off zero
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace rng_detail

// Reserved channel ids; bath channels use 0..N-1.
inline constexpr std::uint64_t kOutcomeChannel = 0xFFFF0001ULL;
inline constexpr std::uint64_t kPolicyChannel  = 0xFFFF0002ULL;
inline constexpr std::uint64_t kOutcomeWalker  = 0xFFFFFFFFULL;

struct RngPolicy {
    std::uint64_t master_seed = 0;

    std::uint64_t key(std::uint64_t trajectory, std::uint64_t step,
                      std::uint64_t walker, std::uint64_t channel) const {
        using rng_detail::splitmix64;
        std::uint64_t h = splitmix64(master_seed ^ 0x6a09e667f3bcc909ULL);
        h = splitmix64(h ^ trajectory);
        h = splitmix64(h ^ step);
        h = splitmix64(h ^ walker);
        h = splitmix64(h ^ channel);
        return h;
    }

    double uniform(std::uint64_t trajectory, std::uint64_t step,
                   std::uint64_t walker, std::uint64_t channel,
                   std::uint64_t index = 0) const {
        return rng_detail::to_unit_open(
            rng_detail::splitmix64(key(trajectory, step, walker, channel) ^ (index * 0xd1342543de82ef95ULL)));
    }

    // Box-Muller on two addressed uniforms.
    double normal(std::uint64_t trajectory, std::uint64_t step,
                  std::uint64_t walker, std::uint64_t channel) const {
        const double u1 = uniform(trajectory, step, walker, channel, 0);
        const double u2 = uniform(trajectory, step, walker, channel, 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double outcome_uniform(std::uint64_t trajectory, std::uint64_t step) const {
        return uniform(trajectory, step, kOutcomeWalker, kOutcomeChannel);
    }

    double policy_uniform(std::uint64_t trajectory, std::uint64_t step) const {
        return uniform(trajectory, step, kOutcomeWalker, kPolicyChannel);
    }
};

}  // namespace steersim
