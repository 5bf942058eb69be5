#include "loadgen/rational.hpp"

#include <limits>

namespace loadgen {

namespace {

__int128 gcd128(__int128 a, __int128 b) noexcept {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const auto t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace

Rational Rational::from_wide(__int128 num, __int128 den) {
    if (den == 0) {
        throw Error(ErrorCode::invalid_argument, "rational with zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const auto g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    constexpr auto lo = static_cast<__int128>(std::numeric_limits<std::int64_t>::min());
    constexpr auto hi = static_cast<__int128>(std::numeric_limits<std::int64_t>::max());
    if (num < lo || num > hi || den > hi) {
        throw Error(ErrorCode::invalid_argument, "rational overflow");
    }
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = num == 0 ? 1 : static_cast<std::int64_t>(den);
    return r;
}

Rational Rational::parse_decimal(const std::string& text) {
    auto fail = [&]() -> Error {
        return Error(ErrorCode::invalid_argument, "not a decimal number: '" + text + "'");
    };
    if (text.empty()) throw fail();
    std::size_t i = 0;
    bool negative = false;
    if (text[0] == '-' || text[0] == '+') {
        negative = text[0] == '-';
        ++i;
    }
    __int128 num = 0;
    __int128 den = 1;
    bool seen_digit = false;
    bool seen_point = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.') {
            if (seen_point) throw fail();
            seen_point = true;
            continue;
        }
        if (c < '0' || c > '9') throw fail();
        seen_digit = true;
        num = num * 10 + (c - '0');
        if (seen_point) den *= 10;
        if (num > (static_cast<__int128>(1) << 62) || den > (static_cast<__int128>(1) << 62)) throw fail();
    }
    if (!seen_digit) throw fail();
    return from_wide(negative ? -num : num, den);
}

}  // namespace loadgen
