#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace nmv {

/// Exact rational number with a positive denominator, always reduced.
///
/// Grid quantities (step size, delays, horizon) live here so that delay
/// alignment is checked with integer arithmetic instead of floating point.
/// Arithmetic throws std::overflow_error if a reduced result leaves int64.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    bool is_integer() const noexcept { return den_ == 1; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string str() const;

    /// Accepts "7", "-3/8", "0.05", "2^-10". Exponent notation ("1e-3") is
    /// rejected because it usually hides an inexact binary float.
    static Rational parse(std::string_view text);

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational operator-() const { return Rational(-num_, den_); }

    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// 2^-exponent for exponent in [0, 62].
Rational dyadic(int exponent);

/// Nearest integer to the rational, halves rounded away from zero.
std::int64_t round_to_integer(const Rational& r);

} // namespace nmv
