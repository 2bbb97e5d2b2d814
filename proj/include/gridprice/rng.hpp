#pragma once

#include <cstdint>
#include <random>

namespace gridprice {

/// Independent draw streams derived from one experiment seed.
enum class Stream : std::uint32_t { Costs = 1, InitialPrices = 2, Test = 99 };

/// mt19937_64 seeded through std::seed_seq from (seed, stream). Both the
/// engine and seed_seq are fully specified by the standard, and uniform()
/// maps raw 64-bit output to doubles by hand, so draws are identical across
/// platforms and standard libraries.
class RngStream {
public:
    RngStream(std::uint64_t seed, Stream stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream)};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace gridprice
