#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bhforge {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt pow2(std::int64_t k) {
    if (k < 0) throw std::invalid_argument("pow2: negative exponent");
    BigInt r = 1;
    r <<= static_cast<unsigned>(k);
    return r;
}

/// floor(a / b) for b > 0.
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    boost::multiprecision::divide_qr(a, b, q, r);
    if (r != 0 && a < 0) --q;
    return q;
}

/// ceil(a / b) for b > 0.
inline BigInt ceil_div(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    boost::multiprecision::divide_qr(a, b, q, r);
    if (r != 0 && a > 0) ++q;
    return q;
}

/// floor(a * 2^k) for any sign of a and k.
inline BigInt floor_shift(const BigInt& a, std::int64_t k) {
    if (k >= 0) return a << static_cast<unsigned>(k);
    const auto s = static_cast<unsigned>(-k);
    if (a >= 0) return a >> s;
    BigInt m = -a;
    BigInt q = m >> s;
    if ((q << s) != m) ++q;
    return -q;
}

inline BigInt ceil_shift(const BigInt& a, std::int64_t k) { return -floor_shift(-a, k); }

inline BigInt isqrt(const BigInt& n) {
    if (n < 0) throw std::invalid_argument("isqrt: negative");
    return boost::multiprecision::sqrt(n);
}

/// Bit length of |a| (0 for a == 0).
inline std::int64_t bit_length(const BigInt& a) {
    if (a == 0) return 0;
    return static_cast<std::int64_t>(boost::multiprecision::msb(boost::multiprecision::abs(a))) + 1;
}

/// a mod 2^64 for a >= 0.
inline std::uint64_t low64(const BigInt& a) {
    return static_cast<std::uint64_t>(a & BigInt(std::numeric_limits<std::uint64_t>::max()));
}

inline std::string to_hex(const BigInt& a) {
    if (a < 0) throw std::invalid_argument("to_hex: negative");
    if (a == 0) return "0";
    std::string out;
    BigInt v = a;
    static constexpr char digits[] = "0123456789abcdef";
    while (v != 0) {
        out.push_back(digits[static_cast<unsigned>(v & 15)]);
        v >>= 4;
    }
    return {out.rbegin(), out.rend()};
}

inline BigInt from_hex(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("from_hex: empty string");
    BigInt v = 0;
    for (char c : s) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else throw std::invalid_argument("from_hex: bad digit");
        v = (v << 4) | d;
    }
    return v;
}

struct BigIntHash {
    std::size_t operator()(const BigInt& a) const noexcept {
        const std::uint64_t lo = low64(boost::multiprecision::abs(a));
        return static_cast<std::size_t>(lo * 0x9E3779B97F4A7C15ULL) ^ static_cast<std::size_t>(bit_length(a));
    }
};

}  // namespace bhforge
