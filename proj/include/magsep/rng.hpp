#ifndef MAGSEP_RNG_HPP
#define MAGSEP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

#include "magsep/constants.hpp"

namespace magsep {

namespace detail {

// SplitMix64 output function. Statistically solid for Monte Carlo use and
// stateless: the n-th output is a pure function of (seed, n).
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t n) {
    std::uint64_t z = seed + (n + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace detail

// Key for an independent substream. Cells draw from streams keyed by
// (master seed, species label, cell index) so that results do not depend
// on sampling order or worker count.
inline std::uint64_t substream_key(std::uint64_t master_seed, std::string_view label,
                                   std::uint64_t index) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    unsigned char seed_bytes[8];
    for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<unsigned char>(master_seed >> (8 * i));
    h = detail::fnv1a64(h, seed_bytes, sizeof(seed_bytes));
    h = detail::fnv1a64(h, label.data(), label.size());
    const unsigned char sep = 0xFF;
    h = detail::fnv1a64(h, &sep, 1);
    unsigned char idx_bytes[8];
    for (int i = 0; i < 8; ++i) idx_bytes[i] = static_cast<unsigned char>(index >> (8 * i));
    h = detail::fnv1a64(h, idx_bytes, sizeof(idx_bytes));
    return detail::splitmix64_at(h, 0);
}

// Counter-based stream: the i-th draw is a function of (key, i) only.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() { return detail::splitmix64_at(key_, counter_++); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Standard normal via Box-Muller; the pair partner is cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        // Guard against log(0).
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = kTwoPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace magsep

#endif
