#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ecgpaper {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Independent stream seed for (base, salt); used for per-step and per-entry streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept;

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// hash(run_seed, entry_id): stable under insertion/removal of other entries.
std::uint64_t seed_for_id(std::uint64_t run_seed, std::string_view id) noexcept;

// Distributions are implemented here rather than taken from <random> so that a
// seed reproduces the same stream with any standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal (Box-Muller, both variates used).
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace ecgpaper
