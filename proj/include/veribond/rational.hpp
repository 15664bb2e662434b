#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace veribond {

/// Exact rational number with a positive denominator, always kept in lowest
/// terms. Used for every fraction that touches a settlement path; floating
/// point is not allowed there.
class Rational {
public:
    constexpr Rational() = default;

    Rational(std::int64_t num, std::int64_t den) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        num_ = g ? num / g : num;
        den_ = g ? den / g : den;
    }

    static Rational from_int(std::int64_t v) { return Rational(v, 1); }

    /// Parses "p/q" or a bare integer "p".
    static Rational parse(std::string_view text);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    std::string str() const {
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    /// floor(this * value) for a non-negative integer amount.
    /// 128-bit intermediate, so amounts up to 2^63 are safe.
    std::uint64_t floor_mul(std::uint64_t value) const {
        if (num_ < 0) throw std::domain_error("Rational::floor_mul: negative fraction");
        const unsigned __int128 prod =
            static_cast<unsigned __int128>(num_) * static_cast<unsigned __int128>(value);
        return static_cast<std::uint64_t>(prod / static_cast<unsigned __int128>(den_));
    }

    Rational operator+(const Rational& o) const {
        return combine(*this, o, /*subtract=*/false);
    }
    Rational operator-(const Rational& o) const {
        return combine(*this, o, /*subtract=*/true);
    }
    Rational operator*(const Rational& o) const {
        const __int128 n = static_cast<__int128>(num_) * o.num_;
        const __int128 d = static_cast<__int128>(den_) * o.den_;
        return reduce(n, d);
    }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const {
        return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
    }
    bool operator<=(const Rational& o) const { return !(o < *this); }
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator>=(const Rational& o) const { return !(*this < o); }

private:
    static Rational combine(const Rational& a, const Rational& b, bool subtract) {
        const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
        const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
        const __int128 n = subtract ? lhs - rhs : lhs + rhs;
        const __int128 d = static_cast<__int128>(a.den_) * b.den_;
        return reduce(n, d);
    }

    static Rational reduce(__int128 n, __int128 d) {
        if (d < 0) { n = -n; d = -d; }
        __int128 a = n < 0 ? -n : n;
        __int128 b = d;
        while (b) { const __int128 t = a % b; a = b; b = t; }
        if (a) { n /= a; d /= a; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("Rational: overflow after reduction");
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline Rational Rational::parse(std::string_view text) {
    const auto slash = text.find('/');
    auto to_i64 = [](std::string_view s) {
        if (s.empty()) throw std::invalid_argument("Rational::parse: empty component");
        std::size_t pos = 0;
        const long long v = std::stoll(std::string(s), &pos);
        if (pos != s.size()) throw std::invalid_argument("Rational::parse: trailing characters");
        return static_cast<std::int64_t>(v);
    };
    if (slash == std::string_view::npos) return Rational(to_i64(text), 1);
    return Rational(to_i64(text.substr(0, slash)), to_i64(text.substr(slash + 1)));
}

}  // namespace veribond
