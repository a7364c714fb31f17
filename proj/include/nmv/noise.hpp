#pragma once

#include "nmv/rational.hpp"

#include <array>
#include <cstdint>

namespace nmv {

/// Address of one standard normal draw. Draws for distinct keys are
/// independent; the same key always yields the same value.
///
/// Negative `fine_step` values are reserved for auxiliary streams
/// (initial-condition offsets, projection directions) so they never collide
/// with Brownian increments.
struct NoiseKey {
    std::uint64_t seed = 0;
    std::uint32_t particle = 0;
    std::int64_t fine_step = 0;
    std::uint32_t component = 0;
};

namespace noise_stream {
inline constexpr std::int64_t initial_offset = -1;
inline constexpr std::int64_t projection = -2;
inline constexpr std::int64_t sampler = -3;
} // namespace noise_stream

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Uniform on the open interval (0,1), 53 bits.
double uniform_open(const NoiseKey& key);

/// Standard normal by inverse CDF of uniform_open(key).
double standard_normal(const NoiseKey& key);

/// sqrt(fine_delta) * Z(key).
double fine_increment(const NoiseKey& key, const Rational& fine_delta);

/// Sum of the `ratio` fine increments covering coarse step `coarse_step`,
/// added in ascending fine index. ratio == 1 reproduces fine_increment.
double coarse_increment(std::uint64_t seed, std::uint32_t particle, std::uint32_t component,
                        std::int64_t coarse_step, std::int64_t ratio, const Rational& fine_delta);

/// Hot-path variant with sqrt(fine_delta) precomputed. Bitwise equal to the
/// Rational overload when sqrt_fine_delta == sqrt(fine_delta.to_double()).
double coarse_increment(std::uint64_t seed, std::uint32_t particle, std::uint32_t component,
                        std::int64_t coarse_step, std::int64_t ratio, double sqrt_fine_delta);

} // namespace nmv
