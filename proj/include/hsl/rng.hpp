// SPDX-License-Identifier: Apache-2.0
#ifndef HSL_RNG_HPP
#define HSL_RNG_HPP

#include <cstdint>
#include <random>

namespace hsl {

namespace detail {

// splitmix64 finalizer, used only to spread (seed, stream) pairs over the
// engine's seed space so that nearby stream ids give uncorrelated states.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t stream_seed(std::uint64_t seed,
                                           std::uint64_t stream) noexcept {
    return mix64(mix64(seed) ^ mix64(stream ^ 0x5851f42d4c957f2dULL));
}

}  // namespace detail

// One independent generator per (seed, stream) pair.  Parallel replicas take
// distinct stream ids and never share an engine; repeated construction with
// the same pair reproduces the byte stream exactly (within one build).
class stream_engine {
  public:
    stream_engine(std::uint64_t seed, std::uint64_t stream)
        : gen_(detail::stream_seed(seed, stream)) {}

    double gaussian() { return normal_(gen_); }

    /// Uniform on [-sqrt(3), sqrt(3)], so the variance is exactly 1.
    double uniform_sym() { return uniform_(gen_); }

    /// +1 or -1 with equal probability.
    double rademacher() { return (gen_() >> 63) ? -1.0 : 1.0; }

    std::uint64_t raw() { return gen_(); }

  private:
    static constexpr double kSqrt3 = 1.7320508075688772;
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{-kSqrt3, kSqrt3};
};

}  // namespace hsl

#endif
