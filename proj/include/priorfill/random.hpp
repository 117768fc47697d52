#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace priorfill {

// Engine output is fixed by the standard; the distribution helpers below
// are spelled out so streams are identical across standard libraries.
using Rng = std::mt19937_64;

/// Child seed = splitmix64(master ^ fnv1a64(name)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view name) noexcept;

/// Uniform double in [0, 1) from the top 53 bits.
double uniform01(Rng& rng) noexcept;

/// Uniform double in [lo, hi).
double uniform(Rng& rng, double lo, double hi) noexcept;

/// Unbiased integer in [0, n). n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept;

/// Standard normal draw (Box-Muller, one value per call).
double standard_normal(Rng& rng) noexcept;

/// Round to nearest integer, ties to even.
long long round_half_even(double v) noexcept;

}  // namespace priorfill
