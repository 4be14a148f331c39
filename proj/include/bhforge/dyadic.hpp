#pragma once

// Certified real arithmetic on dyadic enclosures. Every routine here returns
// an interval [lo * 2^exponent, hi * 2^exponent] that provably contains the
// exact value; truncation and series-tail errors are folded into the bounds.

#include "bhforge/bigint.hpp"
#include "bhforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <utility>

namespace bhforge {

inline constexpr std::int64_t kDefaultPrecisionCap = std::int64_t{1} << 20;

/// Starting precision and hard cap for escalation loops (bits).
struct PrecisionPolicy {
    std::int64_t initial_bits = 64;
    std::int64_t cap_bits = kDefaultPrecisionCap;

    /// Doubles `bits`; throws once the cap would be passed.
    std::int64_t escalate(std::int64_t bits) const {
        if (bits >= cap_bits) throw PrecisionCapExceeded(cap_bits);
        return std::min(bits * 2, cap_bits);
    }
};

struct DyadicInterval {
    BigInt lo = 0;
    BigInt hi = 0;
    std::int64_t exponent = 0;

    static DyadicInterval exact(BigInt m, std::int64_t e = 0) { return {m, m, e}; }

    bool is_exact() const { return lo == hi; }

    /// True when hi - lo, scaled, is at most 2^k.
    bool width_at_most_pow2(std::int64_t k) const {
        const BigInt w = hi - lo;
        if (w == 0) return true;
        return bit_length(w - 1) + exponent <= k;  // w <= 2^(k - exponent)
    }

    /// Same set or a superset, expressed at exponent e.
    DyadicInterval rescaled(std::int64_t e) const {
        return {floor_shift(lo, exponent - e), ceil_shift(hi, exponent - e), e};
    }

    double lo_double() const { return to_double(lo); }
    double hi_double() const { return to_double(hi); }
    double mid_double() const { return 0.5 * (lo_double() + hi_double()); }

private:
    double to_double(const BigInt& m) const {
        const std::int64_t bl = bit_length(m);
        const std::int64_t drop = std::max<std::int64_t>(0, bl - 60);
        const BigInt top = m >= 0 ? BigInt(m >> static_cast<unsigned>(drop))
                                  : BigInt(-(BigInt(-m) >> static_cast<unsigned>(drop)));
        return std::ldexp(static_cast<double>(static_cast<long long>(top)), static_cast<int>(exponent + drop));
    }
};

/// Sign of a*2^ea - b*2^eb.
inline int compare_scaled(const BigInt& a, std::int64_t ea, const BigInt& b, std::int64_t eb) {
    const std::int64_t e = std::min(ea, eb);
    const BigInt x = a << static_cast<unsigned>(ea - e);
    const BigInt y = b << static_cast<unsigned>(eb - e);
    return x < y ? -1 : (x > y ? 1 : 0);
}

inline bool certainly_less(const DyadicInterval& x, const DyadicInterval& y) {
    return compare_scaled(x.hi, x.exponent, y.lo, y.exponent) < 0;
}

inline bool contains(const DyadicInterval& outer, const DyadicInterval& inner) {
    return compare_scaled(outer.lo, outer.exponent, inner.lo, inner.exponent) <= 0 &&
           compare_scaled(inner.hi, inner.exponent, outer.hi, outer.exponent) <= 0;
}

inline DyadicInterval operator-(const DyadicInterval& x) { return {-x.hi, -x.lo, x.exponent}; }

inline DyadicInterval operator+(const DyadicInterval& x, const DyadicInterval& y) {
    const std::int64_t e = std::min(x.exponent, y.exponent);
    const auto sx = static_cast<unsigned>(x.exponent - e);
    const auto sy = static_cast<unsigned>(y.exponent - e);
    return {(x.lo << sx) + (y.lo << sy), (x.hi << sx) + (y.hi << sy), e};
}

inline DyadicInterval operator-(const DyadicInterval& x, const DyadicInterval& y) { return x + (-y); }

inline DyadicInterval operator*(const DyadicInterval& x, const DyadicInterval& y) {
    BigInt c[4] = {x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi};
    return {*std::min_element(c, c + 4), *std::max_element(c, c + 4), x.exponent + y.exponent};
}

/// x * num / den (den > 0), rounded outward to exponent e.
inline DyadicInterval scale_rational(const DyadicInterval& x, const BigInt& num, const BigInt& den,
                                     std::int64_t e) {
    BigInt a = x.lo * num;
    BigInt b = x.hi * num;
    if (num < 0) std::swap(a, b);
    // value = a * 2^x.exponent / den; at exponent e the mantissa is a * 2^(x.exponent - e) / den.
    const std::int64_t s = x.exponent - e;
    if (s >= 0) {
        return {floor_div(a << static_cast<unsigned>(s), den), ceil_div(b << static_cast<unsigned>(s), den), e};
    }
    const BigInt d = den << static_cast<unsigned>(-s);
    return {floor_div(a, d), ceil_div(b, d), e};
}

namespace detail {

/// floor or ceil of (a * 2^ea) / (b * 2^eb) expressed at exponent e; b > 0.
inline BigInt quotient_at(const BigInt& a, std::int64_t ea, const BigInt& b, std::int64_t eb, std::int64_t e,
                          bool round_up) {
    const std::int64_t s = ea - eb - e;
    BigInt num = a;
    BigInt den = b;
    if (s >= 0) num <<= static_cast<unsigned>(s);
    else den <<= static_cast<unsigned>(-s);
    return round_up ? ceil_div(num, den) : floor_div(num, den);
}

}  // namespace detail

/// x / y for y strictly positive, rounded outward to exponent e.
inline DyadicInterval divide_positive(const DyadicInterval& x, const DyadicInterval& y, std::int64_t e) {
    if (y.lo <= 0) throw PreconditionViolation("divide_positive: divisor interval not positive");
    const BigInt& lo_div = x.lo >= 0 ? y.hi : y.lo;
    const BigInt& hi_div = x.hi >= 0 ? y.lo : y.hi;
    return {detail::quotient_at(x.lo, x.exponent, lo_div, y.exponent, e, false),
            detail::quotient_at(x.hi, x.exponent, hi_div, y.exponent, e, true), e};
}

/// The floor of every point in x, when they all agree.
inline std::optional<BigInt> certified_floor(const DyadicInterval& x) {
    BigInt a = floor_shift(x.lo, x.exponent);
    BigInt b = floor_shift(x.hi, x.exponent);
    if (a != b) return std::nullopt;
    return a;
}

/// Enclosure of |x|.
inline DyadicInterval abs(const DyadicInterval& x) {
    if (x.lo >= 0) return x;
    if (x.hi <= 0) return -x;
    return {0, std::max(BigInt(-x.lo), x.hi), x.exponent};
}

/// Enclosure of the distance from x to the nearest integer, or nullopt when x
/// straddles a half-integer (the distance function is not monotone there).
inline std::optional<DyadicInterval> distance_to_nearest_integer(const DyadicInterval& x) {
    const DyadicInterval shifted = x + DyadicInterval::exact(1, -1);  // x + 1/2
    auto n = certified_floor(shifted);                               // nearest integer
    if (!n) return std::nullopt;
    return abs(x - DyadicInterval::exact(*n, 0));
}

/// Guard bits so that accumulated per-term rounding never dominates.
inline std::int64_t guard_bits(std::int64_t w) { return 2 * bit_length(BigInt(w)) + 8; }

/// arctan(u / v) for 0 <= u <= v, v > 0, via Euler's series
///   atan x = sum_n (2^{2n} n!^2 / (2n+1)!) x^{2n+1} / (1+x^2)^{n+1},
/// whose term ratio (2n+2)/(2n+3) * u^2/(u^2+v^2) is at most 1/2.
/// Each computed term under-estimates the true one by at most n+1 ulps,
/// and the tail after the first vanishing term is at most 2(N+1) ulps.
inline DyadicInterval atan_euler(const BigInt& u, const BigInt& v, std::int64_t w) {
    if (u == 0) return DyadicInterval::exact(0, -w);
    const BigInt s = u * u + v * v;
    const BigInt uu = u * u;
    BigInt t = floor_div((u * v) << static_cast<unsigned>(w), s);
    BigInt sum = 0;
    std::int64_t n = 0;
    while (t != 0) {
        sum += t;
        t = floor_div(t * uu * (2 * n + 2), s * (2 * n + 3));
        ++n;
    }
    const BigInt slack = BigInt(n) * (n + 1) / 2 + 2 * (n + 1);
    return {sum, sum + slack, -w};
}

namespace detail {

template <class Compute>
DyadicInterval cached_constant(std::map<std::int64_t, DyadicInterval>& cache, std::mutex& mu, std::int64_t w,
                               Compute&& compute) {
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.lower_bound(w);
        if (it != cache.end()) return it->second.rescaled(-w);
    }
    DyadicInterval v = compute(w);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(w, v);
    return v;
}

}  // namespace detail

/// pi = 16 atan(1/5) - 4 atan(1/239).
inline DyadicInterval pi_interval(std::int64_t w) {
    static std::map<std::int64_t, DyadicInterval> cache;
    static std::mutex mu;
    return detail::cached_constant(cache, mu, w, [](std::int64_t bits) {
        const std::int64_t wi = bits + guard_bits(bits);
        const DyadicInterval a = atan_euler(1, 5, wi);
        const DyadicInterval b = atan_euler(1, 239, wi);
        DyadicInterval pi{16 * a.lo - 4 * b.hi, 16 * a.hi - 4 * b.lo, -wi};
        return pi.rescaled(-bits);
    });
}

/// ln 2 = 2 atanh(1/3) = 2 sum_k 1 / ((2k+1) 3^(2k+1)).
inline DyadicInterval ln2_interval(std::int64_t w) {
    static std::map<std::int64_t, DyadicInterval> cache;
    static std::mutex mu;
    return detail::cached_constant(cache, mu, w, [](std::int64_t bits) {
        const std::int64_t wi = bits + guard_bits(bits);
        const BigInt one = pow2(wi);
        BigInt sum = 0;
        BigInt p = 3;
        std::int64_t k = 0;
        for (;; ++k) {
            const BigInt den = p * (2 * k + 1);
            if (den > one) break;
            sum += one / den;
            p *= 9;
        }
        // k floors (each < 1 ulp) plus a tail below 9/8 ulp.
        DyadicInterval half{sum, sum + k + 2, -wi};
        DyadicInterval ln2{2 * half.lo, 2 * half.hi, -wi};
        return ln2.rescaled(-bits);
    });
}

/// arctan(u / v) for 0 <= u <= v, v > 0, at exponent -w. Arguments above
/// tan(pi/8) are reflected through atan x = pi/4 - atan((1-x)/(1+x)).
inline DyadicInterval atan_ratio(const BigInt& u, const BigInt& v, std::int64_t w) {
    const std::int64_t wi = w + guard_bits(w);
    if (u == v) {
        DyadicInterval p = pi_interval(wi);
        p.exponent -= 2;
        return p.rescaled(-w);
    }
    if (u * (u + v) <= v * (v - u)) return atan_euler(u, v, wi).rescaled(-w);
    DyadicInterval quarter_pi = pi_interval(wi);
    quarter_pi.exponent -= 2;
    return (quarter_pi - atan_euler(v - u, v + u, wi)).rescaled(-w);
}

/// Argument of the lattice vector (x, y) in turns, enclosed in [0, 1).
/// Axis and diagonal directions come back as exact multiples of 1/8.
inline DyadicInterval turns_interval(const BigInt& x, const BigInt& y, std::int64_t w) {
    if (x == 0 && y == 0) throw PreconditionViolation("turns_interval: zero vector");
    const BigInt ax = boost::multiprecision::abs(x);
    const BigInt ay = boost::multiprecision::abs(y);
    // Quadrant-local angle in turns, within [0, 1/4].
    DyadicInterval local;
    if (ay == 0) {
        local = DyadicInterval::exact(0, -w);
    } else if (ax == 0) {
        local = DyadicInterval::exact(1, -2);
    } else if (ax == ay) {
        local = DyadicInterval::exact(1, -3);
    } else {
        const std::int64_t wi = w + guard_bits(w);
        DyadicInterval two_pi = pi_interval(wi);
        two_pi.exponent += 1;
        if (ay < ax) {
            local = divide_positive(atan_ratio(ay, ax, wi), two_pi, -wi);
        } else {
            local = DyadicInterval::exact(1, -2) - divide_positive(atan_ratio(ax, ay, wi), two_pi, -wi);
        }
    }
    DyadicInterval t;
    if (x > 0 && y >= 0) t = local;
    else if (x <= 0 && y > 0) t = DyadicInterval::exact(1, -1) - local;
    else if (x < 0 && y <= 0) t = DyadicInterval::exact(1, -1) + local;
    else t = DyadicInterval::exact(1, 0) - local;
    if (t.is_exact()) return t;
    return t.rescaled(-w);
}

/// e^y for 0 <= y <= 1 (both endpoints), at exponent -w.
inline DyadicInterval exp_small(const DyadicInterval& y, std::int64_t w) {
    const std::int64_t wi = w + guard_bits(w);
    const DyadicInterval ys = y.rescaled(-wi);
    if (ys.lo < 0 || ys.hi > pow2(wi)) throw PreconditionViolation("exp_small: argument outside [0, 1]");
    const BigInt one = pow2(wi);
    BigInt lo_sum = 0;
    {
        BigInt t = one;
        for (std::int64_t k = 0; t != 0; ++k) {
            lo_sum += t;
            t = floor_div(t * ys.lo, one * (k + 1));
        }
    }
    BigInt hi_sum = 0;
    {
        BigInt t = one;
        for (std::int64_t k = 0;; ++k) {
            hi_sum += t;
            t = ceil_div(t * ys.hi, one * (k + 1));
            // For k+1 >= 2 the term ratio is at most 1/2, so the tail is at most 2t.
            if (k + 1 >= 2 && t <= 1) {
                hi_sum += 2 * t;
                break;
            }
        }
    }
    return DyadicInterval{lo_sum, hi_sum, -wi}.rescaled(-w);
}

namespace detail {

/// Enclosure of 2^x for an exact dyadic x = m * 2^e, relative precision ~2^-w.
inline DyadicInterval exp2_point(const BigInt& m, std::int64_t e, std::int64_t w) {
    const BigInt n = floor_shift(m, e);
    DyadicInterval frac = DyadicInterval::exact(0, 0);
    if (e < 0) frac = DyadicInterval::exact(m - (n << static_cast<unsigned>(-e)), e);
    const std::int64_t wi = w + guard_bits(w);
    const DyadicInterval y = frac * ln2_interval(wi);
    DyadicInterval r = exp_small(y, wi);
    r.exponent += static_cast<std::int64_t>(n);
    return r;
}

}  // namespace detail

/// Enclosure of 2^q over the interval q, with roughly w bits of relative accuracy.
inline DyadicInterval exp2_interval(const DyadicInterval& q, std::int64_t w) {
    const DyadicInterval a = detail::exp2_point(q.lo, q.exponent, w);
    const DyadicInterval b = detail::exp2_point(q.hi, q.exponent, w);
    const std::int64_t e = std::min(a.exponent, b.exponent);
    return {floor_shift(a.lo, a.exponent - e), ceil_shift(b.hi, b.exponent - e), e};
}

/// sqrt(m) for an integer m >= 0, at exponent -w.
inline DyadicInterval sqrt_interval(const BigInt& m, std::int64_t w) {
    const BigInt scaled = m << static_cast<unsigned>(2 * w);
    const BigInt s = isqrt(scaled);
    return {s, s * s == scaled ? s : BigInt(s + 1), -w};
}

}  // namespace bhforge
