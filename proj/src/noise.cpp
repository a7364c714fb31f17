#include "nmv/noise.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>

namespace nmv {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

std::array<std::uint32_t, 4> counter_of(const NoiseKey& k) {
    const auto step = static_cast<std::uint64_t>(k.fine_step);
    return {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), k.particle, k.component};
}

} // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
        mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

double uniform_open(const NoiseKey& k) {
    const auto out = philox4x32_10(counter_of(k), {static_cast<std::uint32_t>(k.seed),
                                                   static_cast<std::uint32_t>(k.seed >> 32)});
    const std::uint64_t bits = (static_cast<std::uint64_t>(out[0]) << 32 | out[1]) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double standard_normal(const NoiseKey& k) {
    // Phi^{-1}(u) = -sqrt(2) * erfc^{-1}(2u)
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * uniform_open(k));
}

double fine_increment(const NoiseKey& k, const Rational& fine_delta) {
    return std::sqrt(fine_delta.to_double()) * standard_normal(k);
}

double coarse_increment(std::uint64_t seed, std::uint32_t particle, std::uint32_t component,
                        std::int64_t coarse_step, std::int64_t ratio, double sqrt_fine_delta) {
    NoiseKey k{seed, particle, coarse_step * ratio, component};
    double sum = 0.0;
    for (std::int64_t j = 0; j < ratio; ++j, ++k.fine_step) sum += sqrt_fine_delta * standard_normal(k);
    return sum;
}

double coarse_increment(std::uint64_t seed, std::uint32_t particle, std::uint32_t component,
                        std::int64_t coarse_step, std::int64_t ratio, const Rational& fine_delta) {
    return coarse_increment(seed, particle, component, coarse_step, ratio, std::sqrt(fine_delta.to_double()));
}

} // namespace nmv
