#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spotter {

/// Non-negative exact fraction in lowest terms, den > 0.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t n, std::int64_t d) {
        if (d == 0) throw std::domain_error("zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        const auto g = std::gcd(n, d);
        return g == 0 ? Rational{0, 1} : Rational{n / g, d / g};
    }

    friend bool operator==(const Rational&, const Rational&) = default;

    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        const auto g = std::gcd(a.den, b.den);
        const __int128 n = static_cast<__int128>(a.num) * (b.den / g) + static_cast<__int128>(b.num) * (a.den / g);
        const __int128 d = static_cast<__int128>(a.den / g) * b.den;
        __int128 x = n < 0 ? -n : n, y = d;
        while (y != 0) {
            auto t = x % y;
            x = y;
            y = t;
        }
        if (x == 0) return {};
        return Rational{static_cast<std::int64_t>(n / x), static_cast<std::int64_t>(d / x)};
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// 100 * part / whole, or 0 when whole is 0.
inline Rational percent(std::int64_t part, std::int64_t whole) {
    if (whole == 0) return {};
    return Rational::make(part * 100, whole);
}

/// Tenths nearest to the value, halves rounded up.
inline std::int64_t round_tenths(const Rational& r) {
    const __int128 n = static_cast<__int128>(r.num) * 20 + r.den;
    return static_cast<std::int64_t>(n / (static_cast<__int128>(r.den) * 2));
}

inline std::string format_tenths(std::int64_t tenths) {
    std::string out = std::to_string(tenths / 10);
    out += '.';
    out += static_cast<char>('0' + tenths % 10);
    return out;
}

inline std::string format_percent(const Rational& r) { return format_tenths(round_tenths(r)); }

/// Largest-remainder rounding to tenths: each entry lands within 0.1 of its exact
/// value and the entries sum to the rounded exact total.
inline std::vector<std::int64_t> apportion_tenths(std::span<const Rational> values) {
    std::vector<std::int64_t> out(values.size());
    std::vector<Rational> rem(values.size());
    Rational total;
    std::int64_t floor_sum = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const __int128 scaled = static_cast<__int128>(values[i].num) * 10;
        out[i] = static_cast<std::int64_t>(scaled / values[i].den);
        rem[i] = Rational{static_cast<std::int64_t>(scaled % values[i].den), values[i].den};
        floor_sum += out[i];
        total = total + values[i];
    }
    std::int64_t leftover = round_tenths(total) - floor_sum;
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rem[b] < rem[a]; });
    for (std::size_t k = 0; k < idx.size() && leftover > 0; ++k, --leftover) {
        if (rem[idx[k]].num == 0) break;
        ++out[idx[k]];
    }
    return out;
}

}  // namespace spotter
