#pragma once

#include <cstdint>

namespace rdbp {

/// Address of one draw in the (run, generation, slot) lattice. Coupled
/// processes that read the same key see the same value.
struct StreamKey {
    std::uint64_t run = 0;
    std::uint64_t generation = 0;
    std::uint64_t slot = 0;
};

/// Which i.i.d. matrix a draw belongs to.
enum class Channel : std::uint64_t {
    Offspring = 1,
    Production = 2,
    Claim = 3,
    Sample = 4,
};

/// Counter-based generator: a draw is a pure function of (seed, key, channel),
/// built from chained splitmix64 finalizers. No state, so any thread may call
/// it and the result does not depend on call order or platform.
class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    constexpr std::uint64_t seed() const noexcept { return seed_; }

    constexpr std::uint64_t bits(const StreamKey& key, Channel channel) const noexcept {
        std::uint64_t h = mix(seed_ + 0x9E3779B97F4A7C15ULL);
        h = mix(h ^ (key.run * 0xD1B54A32D192ED03ULL));
        h = mix(h ^ (key.generation * 0xAEF17502108EF2D9ULL));
        h = mix(h ^ (key.slot * 0x8CB92BA72F3D8DD7ULL));
        return mix(h ^ static_cast<std::uint64_t>(channel));
    }

    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    constexpr double uniform(const StreamKey& key, Channel channel) const noexcept {
        return (static_cast<double>(bits(key, channel) >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace rdbp
