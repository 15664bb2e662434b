#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "veribond/rational.hpp"

namespace veribond {

/// Non-negative amount in integer minor units (e.g. cents). Arithmetic is
/// checked: overflow and going below zero throw instead of wrapping.
class Money {
public:
    constexpr Money() = default;
    constexpr explicit Money(std::uint64_t minor) : minor_(minor) {}

    static constexpr Money zero() { return Money(0); }

    std::uint64_t minor_units() const { return minor_; }
    bool is_zero() const { return minor_ == 0; }

    Money operator+(Money o) const {
        if (minor_ > UINT64_MAX - o.minor_)
            throw std::overflow_error("Money: addition overflow");
        return Money(minor_ + o.minor_);
    }
    Money operator-(Money o) const {
        if (o.minor_ > minor_)
            throw std::underflow_error("Money: subtraction below zero");
        return Money(minor_ - o.minor_);
    }
    Money& operator+=(Money o) { *this = *this + o; return *this; }
    Money& operator-=(Money o) { *this = *this - o; return *this; }

    /// floor(fraction * amount), exact.
    Money scaled_floor(const Rational& fraction) const {
        return Money(fraction.floor_mul(minor_));
    }

    auto operator<=>(const Money&) const = default;

    std::string str() const { return std::to_string(minor_); }

private:
    std::uint64_t minor_ = 0;
};

}  // namespace veribond
