#include "greenevo/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace greenevo {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept
{
    std::uint64_t h = splitmix64(master);
    for (auto p : path) {
        h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    }
    return h;
}

double uniform01(Rng& rng) noexcept
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_real(Rng& rng, double lo, double hi) noexcept
{
    const double r = lo + (hi - lo) * uniform01(rng);
    // lo + (hi-lo)*u can round up to hi
    return r < hi ? r : std::nextafter(hi, lo);
}

std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) noexcept
{
    if (hi <= lo) {
        return lo;
    }
    const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == std::numeric_limits<std::uint64_t>::max()) {
        return static_cast<std::int64_t>(rng());
    }
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x = rng();
    while (x >= limit) {
        x = rng();
    }
    return lo + static_cast<std::int64_t>(x % range);
}

std::size_t uniform_index(Rng& rng, std::size_t n) noexcept
{
    return static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1));
}

bool bernoulli(Rng& rng, double p) noexcept
{
    if (p <= 0.0) {
        return false;
    }
    return uniform01(rng) < p;
}

double standard_normal(Rng& rng) noexcept
{
    double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    if (u1 <= 0.0) {
        u1 = 0x1.0p-53;
    }
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace greenevo
