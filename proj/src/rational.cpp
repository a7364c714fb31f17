#include "nmv/rational.hpp"

#include <cctype>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace nmv {

namespace {

__extension__ typedef __int128 i128;

std::pair<std::int64_t, std::int64_t> reduce_pair(i128 num, i128 den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 a = num < 0 ? -num : num;
    i128 b = den;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        num /= a;
        den /= a;
    }
    constexpr i128 lo = std::numeric_limits<std::int64_t>::min();
    constexpr i128 hi = std::numeric_limits<std::int64_t>::max();
    if (num < lo || num > hi || den > hi) throw std::overflow_error("rational overflow");
    return {static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

Rational reduce(i128 num, i128 den) {
    const auto [n, d] = reduce_pair(num, den);
    return Rational(n, d);
}

std::int64_t parse_int(std::string_view s, std::string_view whole) {
    if (s.empty()) throw std::invalid_argument("malformed rational '" + std::string(whole) + "'");
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) throw std::invalid_argument("malformed rational '" + std::string(whole) + "'");
    i128 v = 0;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            throw std::invalid_argument("malformed rational '" + std::string(whole) + "'");
        v = v * 10 + (s[i] - '0');
        if (v > std::numeric_limits<std::int64_t>::max()) throw std::overflow_error("rational overflow");
    }
    return static_cast<std::int64_t>(neg ? -v : v);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

} // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    std::tie(num_, den_) = reduce_pair(num, den);
}

std::string Rational::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(std::string_view text) {
    const std::string_view s = trim(text);
    if (auto caret = s.find('^'); caret != std::string_view::npos) {
        if (trim(s.substr(0, caret)) != "2")
            throw std::invalid_argument("only powers of two are accepted: '" + std::string(s) + "'");
        const auto e = parse_int(trim(s.substr(caret + 1)), s);
        if (e > 0 || e < -62) throw std::invalid_argument("exponent out of range in '" + std::string(s) + "'");
        return dyadic(static_cast<int>(-e));
    }
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        const auto n = parse_int(trim(s.substr(0, slash)), s);
        const auto d = parse_int(trim(s.substr(slash + 1)), s);
        if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(s) + "'");
        return Rational(n, d);
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        std::string_view ip = s.substr(0, dot);
        std::string_view fp = s.substr(dot + 1);
        bool neg = !ip.empty() && ip[0] == '-';
        if (!ip.empty() && (ip[0] == '-' || ip[0] == '+')) ip.remove_prefix(1);
        if (fp.empty() && ip.empty()) throw std::invalid_argument("malformed rational '" + std::string(s) + "'");
        if (fp.size() > 18) throw std::invalid_argument("too many decimals in '" + std::string(s) + "'");
        const std::int64_t whole = ip.empty() ? 0 : parse_int(ip, s);
        const std::int64_t frac = fp.empty() ? 0 : parse_int(fp, s);
        if ((!ip.empty() && whole < 0) || (!fp.empty() && (fp[0] == '-' || fp[0] == '+')))
            throw std::invalid_argument("malformed rational '" + std::string(s) + "'");
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
        Rational r = Rational(whole) + Rational(frac, scale);
        return neg ? -r : r;
    }
    return Rational(parse_int(s, s));
}

Rational operator+(const Rational& a, const Rational& b) {
    return reduce(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                  static_cast<i128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
    return reduce(static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_,
                  static_cast<i128>(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
    return reduce(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("division by zero rational");
    return reduce(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const i128 l = static_cast<i128>(a.num_) * b.den_;
    const i128 r = static_cast<i128>(b.num_) * a.den_;
    if (l < r) return std::strong_ordering::less;
    if (l > r) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Rational dyadic(int exponent) {
    if (exponent < 0 || exponent > 62) throw std::invalid_argument("dyadic exponent out of range");
    return Rational(1, std::int64_t{1} << exponent);
}

std::int64_t round_to_integer(const Rational& r) {
    // floor(|num|/den + 1/2) with the sign restored
    const std::int64_t n = r.num() < 0 ? -r.num() : r.num();
    const std::int64_t q = (2 * static_cast<i128>(n) + r.den()) / (2 * static_cast<i128>(r.den()));
    return r.num() < 0 ? -q : q;
}

} // namespace nmv
