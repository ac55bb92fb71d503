#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace causal {

namespace detail {

inline constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Root seed plus a stream id. Every random quantity in the library is a
/// pure function of (seed, stream, position in the stream).
struct Seed {
    std::uint64_t value = 0;
    std::uint64_t stream = 0;

    /// Independent child stream, e.g. `seed.substream("drivers", path_index)`.
    Seed substream(std::string_view tag, std::uint64_t index = 0) const noexcept {
        const std::uint64_t mixed =
            detail::splitmix_finalize(stream ^ detail::fnv1a(tag)) + detail::splitmix_finalize(index + 0x632be59bd9b4e019ULL);
        return Seed{value, detail::splitmix_finalize(mixed)};
    }

    bool operator==(const Seed&) const = default;
};

/// Counter-based generator: output i is a bijective mix of key + i * gamma,
/// with the key derived from (seed, stream). Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(Seed seed) noexcept
        : key_(detail::splitmix_finalize(seed.value ^ 0x9e3779b97f4a7c15ULL) ^
               detail::splitmix_finalize(seed.stream + 0xd1b54a32d192ed03ULL)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        return detail::splitmix_finalize(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform double in the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the Box-Muller transform; values come in pairs.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace causal
