#pragma once

#include <cstdint>
#include <limits>

namespace ralq {

/// Independent draw families within one (seed, time) cell.
enum class Channel : std::uint64_t {
    Process = 1,
    Measurement = 2,
    Moments = 3,
};

/// Counter-based generator: the output stream is a pure function of
/// (seed, index, channel), so draws for step t never depend on how many
/// numbers were consumed elsewhere. Satisfies UniformRandomBitGenerator.
class StreamRng {
public:
    using result_type = std::uint64_t;

    StreamRng(std::uint64_t seed, std::uint64_t index, Channel channel)
        : state_(mix(mix(seed) ^ mix(index + 0x632BE59BD9B4E019ULL) ^
                     (static_cast<std::uint64_t>(channel) * 0x9E3779B97F4A7C15ULL))) {}

    result_type operator()() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

private:
    // SplitMix64 finalizer.
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace ralq
