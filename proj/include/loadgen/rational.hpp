#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>

#include "loadgen/error.hpp"

namespace loadgen {

/// Exact non-negative-denominator rational over int64. Intermediate products
/// use 128-bit arithmetic; results must fit back into int64.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT(implicit)
    Rational(std::int64_t num, std::int64_t den) {
        if (den == 0) {
            throw Error(ErrorCode::invalid_argument, "rational with zero denominator");
        }
        assign(num, den);
    }

    constexpr std::int64_t num() const noexcept { return num_; }
    constexpr std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::int64_t floor() const noexcept {
        auto q = num_ / den_;
        if ((num_ % den_ != 0) && (num_ < 0)) --q;
        return q;
    }
    std::int64_t ceil() const noexcept {
        auto q = num_ / den_;
        if ((num_ % den_ != 0) && (num_ > 0)) ++q;
        return q;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                         static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                         static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) {
            throw Error(ErrorCode::invalid_argument, "rational division by zero");
        }
        return from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
    }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
        const auto lhs = static_cast<__int128>(a.num_) * b.den_;
        const auto rhs = static_cast<__int128>(b.num_) * a.den_;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    Rational abs() const noexcept {
        Rational r = *this;
        if (r.num_ < 0) r.num_ = -r.num_;
        return r;
    }

    /// "n/d", or "n" when integral.
    std::string to_string() const {
        return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
    }

    /// Parses a plain decimal such as "25", "12.5" or "0.333" exactly.
    static Rational parse_decimal(const std::string& text);

private:
    static Rational from_wide(__int128 num, __int128 den);

    void assign(std::int64_t num, std::int64_t den) noexcept {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const auto g = std::gcd(num, den);
        num_ = g ? num / g : num;
        den_ = g ? den / g : den;
        if (num_ == 0) den_ = 1;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace loadgen
