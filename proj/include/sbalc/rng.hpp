#pragma once

#include <cstdint>
#include <random>

#include "sbalc/normal.hpp"

namespace sbalc {

/// Named substream ids used by the driver. Keeping them public lets
/// tests and oracles reproduce the exact point sets a run used.
enum class Stream : std::uint64_t {
    pool = 1,
    pool_enrichment = 2,
    acquisition = 3,
    sir = 4,
    observations = 5,
};

/// Deterministic seeded stream. All distributions are derived from
/// uniform bits by explicit inverse-CDF maps so that results are
/// reproducible across platforms and standard-library versions.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : eng_(seed) {}

    RngStream(std::uint64_t root_seed, Stream id)
        : eng_(mix(root_seed, static_cast<std::uint64_t>(id))) {}

    /// Uniform in the open interval (0,1).
    double uniform01() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double normal(double mean, double std) {
        return mean + std * normal_quantile(uniform01());
    }

    std::uint64_t next_u64() { return eng_(); }

private:
    // splitmix64 finalizer over (seed, stream id)
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t id) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (id + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 eng_;
};

} // namespace sbalc
