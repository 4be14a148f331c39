#pragma once

#include "bhforge/bigint.hpp"
#include "bhforge/dyadic.hpp"
#include "bhforge/errors.hpp"
#include "bhforge/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bhforge {

/// First-octant Gaussian prime a + bi, a > b > 0, over a rational prime
/// norm = a^2 + b^2 with norm = 1 (mod 4).
struct GaussianPrime {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::uint64_t norm = 0;

    friend bool operator==(const GaussianPrime&, const GaussianPrime&) = default;
    friend auto operator<=>(const GaussianPrime& x, const GaussianPrime& y) { return x.norm <=> y.norm; }
};

inline constexpr std::uint64_t kDefaultSieveCap = std::uint64_t{1} << 31;

namespace detail {

inline std::uint64_t mulmod(std::uint64_t x, std::uint64_t y, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(x) * y % m);
}

inline std::uint64_t powmod(std::uint64_t base, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    base %= m;
    while (e != 0) {
        if (e & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        e >>= 1;
    }
    return r;
}

inline std::uint64_t isqrt64(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

}  // namespace detail

/// Writes a prime p = 1 (mod 4) as a^2 + b^2 with a > b > 0 (Hermite-Serret:
/// Euclid on (p, r) with r^2 = -1 mod p stops at the first remainder below sqrt p).
inline GaussianPrime decompose_prime(std::uint64_t p) {
    if (p % 4 != 1) throw PreconditionViolation("decompose_prime: p != 1 mod 4");
    std::uint64_t r = 0;
    for (std::uint64_t c = 2; c < p; ++c) {
        r = detail::powmod(c, (p - 1) / 4, p);
        if (detail::mulmod(r, r, p) == p - 1) break;
    }
    std::uint64_t x = p;
    std::uint64_t y = r;
    const std::uint64_t root = detail::isqrt64(p);
    while (y > root) {
        const std::uint64_t t = x % y;
        x = y;
        y = t;
    }
    const std::uint64_t rest = p - y * y;
    const std::uint64_t z = detail::isqrt64(rest);
    if (z * z != rest) throw PreconditionViolation("decompose_prime: " + std::to_string(p) + " is not prime");
    return {std::max(y, z), std::min(y, z), p};
}

/// Primes p = 1 (mod 4), lo <= p <= hi, by a segmented odd-only sieve.
inline std::vector<std::uint64_t> primes_1_mod_4(std::uint64_t lo, std::uint64_t hi,
                                                 std::uint64_t sieve_cap = kDefaultSieveCap) {
    if (hi > sieve_cap)
        throw SearchBudgetExceeded("sieve bound " + std::to_string(hi) + " exceeds cap " + std::to_string(sieve_cap));
    std::vector<std::uint64_t> out;
    if (hi < 5 || lo > hi) return out;
    lo = std::max<std::uint64_t>(lo, 5);
    const std::uint64_t root = detail::isqrt64(hi);
    std::vector<std::uint32_t> small;
    {
        std::vector<bool> comp(root + 1, false);
        for (std::uint64_t i = 3; i <= root; i += 2) {
            if (comp[i]) continue;
            small.push_back(static_cast<std::uint32_t>(i));
            for (std::uint64_t j = i * i; j <= root; j += 2 * i) comp[j] = true;
        }
    }
    constexpr std::uint64_t kSegment = std::uint64_t{1} << 22;
    std::vector<bool> comp;
    for (std::uint64_t seg = lo; seg <= hi; seg += kSegment) {
        const std::uint64_t end = std::min(hi, seg + kSegment - 1);
        comp.assign(end - seg + 1, false);
        for (std::uint32_t q : small) {
            const std::uint64_t qq = static_cast<std::uint64_t>(q) * q;
            if (qq > end) break;
            std::uint64_t start = std::max(qq, (seg + q - 1) / q * q);
            if (start % 2 == 0) start += q;
            for (std::uint64_t j = start; j <= end; j += 2 * q) comp[j - seg] = true;
        }
        std::uint64_t first = seg + ((1 + 4 - seg % 4) % 4);  // first value = 1 mod 4
        for (std::uint64_t n = first; n <= end; n += 4)
            if (!comp[n - seg]) out.push_back(n);
        if (end == hi) break;
    }
    return out;
}

/// One first-octant Gaussian prime per rational prime p = 1 (mod 4) up to
/// max_norm, sorted by norm.
inline std::vector<GaussianPrime> sieve_gaussian_primes(std::uint64_t max_norm,
                                                        std::uint64_t sieve_cap = kDefaultSieveCap) {
    std::vector<GaussianPrime> out;
    for (std::uint64_t p : primes_1_mod_4(5, max_norm, sieve_cap)) out.push_back(decompose_prime(p));
    return out;
}

/// Enclosure of theta(p) = arctan(b/a) / (2 pi) of width <= 2^-precision_bits.
inline DyadicInterval theta_interval(const GaussianPrime& p, std::int64_t precision_bits,
                                     const PrecisionPolicy& policy = {}) {
    if (precision_bits < 8) throw PreconditionViolation("theta_interval: precision_bits < 8");
    if (!(p.a > p.b && p.b > 0)) throw PreconditionViolation("theta_interval: prime not in the first octant");
    if (precision_bits > policy.cap_bits) throw PrecisionCapExceeded(policy.cap_bits);
    std::int64_t w = precision_bits + 4;
    for (;;) {
        DyadicInterval t = turns_interval(BigInt(p.a), BigInt(p.b), w);
        const bool inside = t.lo > 0 && certainly_less(t, DyadicInterval::exact(1, -3));
        if (inside && t.width_at_most_pow2(-precision_bits)) return t;
        if (w >= policy.cap_bits) throw PrecisionCapExceeded(policy.cap_bits);
        w = std::min(2 * w, policy.cap_bits);
    }
}

/// floor(alpha * theta * 2^bits) if the enclosure `theta` decides it.
inline std::optional<BigInt> truncation_from(const DyadicInterval& theta, const ExactRational& alpha,
                                             std::int64_t bits) {
    const BigInt num = alpha.num();
    const BigInt den = alpha.den();
    BigInt lo = detail::quotient_at(theta.lo * num, theta.exponent, den, 0, -bits, false);
    BigInt hi = detail::quotient_at(theta.hi * num, theta.exponent, den, 0, -bits, false);
    if (lo != hi) return std::nullopt;
    return lo;
}

/// floor(alpha * theta(p) * 2^bits), escalating precision until the enclosure
/// no longer straddles a point of the 2^-bits grid. `hint` is reused and
/// refreshed in place when supplied.
inline BigInt alpha_theta_truncation(const GaussianPrime& p, const ExactRational& alpha, std::int64_t bits,
                                     const PrecisionPolicy& policy = {}, DyadicInterval* hint = nullptr) {
    if (hint != nullptr && hint->hi != 0) {
        if (auto t = truncation_from(*hint, alpha, bits)) return *t;
    }
    std::int64_t w = std::max<std::int64_t>({policy.initial_bits, bits + 32, 8});
    for (;;) {
        if (w > policy.cap_bits) throw PrecisionCapExceeded(policy.cap_bits);
        const DyadicInterval theta = theta_interval(p, w, policy);
        if (auto t = truncation_from(theta, alpha, bits)) {
            if (hint != nullptr) *hint = theta;
            return *t;
        }
        w = policy.escalate(w);
    }
}

/// The first `count` binary digits of alpha * theta(p).
inline std::vector<std::uint8_t> certified_digits(const ExactRational& alpha, const GaussianPrime& p,
                                                  std::int64_t count, const PrecisionPolicy& policy = {}) {
    if (count <= 0) throw PreconditionViolation("certified_digits: count must be positive");
    if (alpha.num() <= 0) throw PreconditionViolation("certified_digits: alpha must be positive");
    const BigInt t = alpha_theta_truncation(p, alpha, count, policy);
    if (t >= pow2(count)) throw PreconditionViolation("certified_digits: alpha * theta >= 1");
    std::vector<std::uint8_t> digits(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i)
        digits[static_cast<std::size_t>(i)] = boost::multiprecision::bit_test(t, static_cast<unsigned>(count - 1 - i)) ? 1 : 0;
    return digits;
}

}  // namespace bhforge
