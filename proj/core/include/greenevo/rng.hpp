#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace greenevo {

// mt19937_64's output sequence is fixed by the standard; the helpers below
// avoid <random> distributions, whose algorithms vary between libraries.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Hash a master seed together with a path of coordinates (run, generation, slot, ...).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng) noexcept;

/// Uniform double in [lo, hi).
double uniform_real(Rng& rng, double lo, double hi) noexcept;

/// Uniform integer in [lo, hi], both inclusive. Unbiased (rejection sampling).
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) noexcept;

/// Uniform index in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n) noexcept;

bool bernoulli(Rng& rng, double p) noexcept;

/// Standard normal via Box-Muller; consumes two draws per call.
double standard_normal(Rng& rng) noexcept;

template <class It>
void shuffle(It first, It last, Rng& rng)
{
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = uniform_index(rng, i);
        std::swap(first[i - 1], first[j]);
    }
}

} // namespace greenevo
