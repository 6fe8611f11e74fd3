#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace iovpr {

/// Seeded random stream. The engine is std::mt19937_64, whose output sequence is
/// fixed by the C++ standard; the mappings to doubles and bounded integers are
/// implemented here so results do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound) by rejection; bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via Box-Muller (one value per call).
    double normal();

    /// First `count` entries of a Fisher-Yates shuffle of `items` (all of them when
    /// count >= size). Equivalent to sampling without replacement.
    template <typename T>
    std::vector<T> sample(std::vector<T> items, std::size_t count) {
        const std::size_t n = items.size();
        const std::size_t take = count < n ? count : n;
        for (std::size_t i = 0; i < take; ++i) {
            const auto j = i + static_cast<std::size_t>(below(n - i));
            std::swap(items[i], items[j]);
        }
        items.resize(take);
        return items;
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for a named stage: mix64(root ^ fnv1a64(stage)).
std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) noexcept;

/// Seed for the i-th sub-stream of a stage seed.
std::uint64_t derive_seed(std::uint64_t stage_seed, std::uint64_t index) noexcept;

}  // namespace iovpr
