#pragma once

// Shells P_K of Gaussian primes and the integer encoding b_p of each prime.
//
// Bit layout of b_p for p in P_K (d = ceil(log2 h)):
//   block Delta_j (2j-1 bits) at offset (j-1)^2 + (2d+1)(j-1), j = 1..K,
//   marker bit at K^2 + (2d+1)K + (d+1), every other bit zero.
// Consecutive block windows are separated by 2d+1 zero bits.

#include "bhforge/bigint.hpp"
#include "bhforge/dyadic.hpp"
#include "bhforge/errors.hpp"
#include "bhforge/gaussian.hpp"
#include "bhforge/rational.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace bhforge {

inline constexpr int kMaxShell = 32;  // Delta_j must fit in 64 bits

struct ShellConfig {
    int h = 2;
    ExactRational alpha{1};
    PrecisionPolicy precision{};
    std::uint64_t sieve_cap = kDefaultSieveCap;

    int d() const {
        int d = 0;
        while ((1 << d) < h) ++d;
        return d;
    }

    /// (h-1)^2 + 1; c_h = sqrt(this) + (h-1).
    std::int64_t c_radicand() const { return static_cast<std::int64_t>(h - 1) * (h - 1) + 1; }

    /// Coefficients of c^2 - 2(h-1)c - 1, constant term first.
    std::array<std::int64_t, 3> c_poly() const { return {-1, -2 * static_cast<std::int64_t>(h - 1), 1}; }

    /// Enclosure of c_h of width <= 2^-w.
    DyadicInterval c_enclosure(std::int64_t w = 128) const {
        DyadicInterval s = sqrt_interval(BigInt(c_radicand()), w);
        return s + DyadicInterval::exact(BigInt(h - 1), 0);
    }

    double c_approx() const { return std::sqrt(static_cast<double>(c_radicand())) + (h - 1); }

    void validate() const {
        if (h < 2 || h > 4) throw PreconditionViolation("h must be 2, 3 or 4");
        require_alpha(alpha);
    }
};

inline ShellConfig make_config(int h, ExactRational alpha = ExactRational(1)) {
    ShellConfig cfg;
    cfg.h = h;
    cfg.alpha = alpha;
    cfg.validate();
    return cfg;
}

inline std::int64_t block_offset(int j, int d) {
    return static_cast<std::int64_t>(j - 1) * (j - 1) + static_cast<std::int64_t>(2 * d + 1) * (j - 1);
}

inline std::int64_t marker_position(int K, int d) {
    return static_cast<std::int64_t>(K) * K + static_cast<std::int64_t>(2 * d + 1) * K + d + 1;
}

/// Delta_1 .. Delta_K of one prime; Delta_j < 2^(2j-1).
struct BlockVector {
    int K = 0;
    std::vector<std::uint64_t> blocks;

    friend bool operator==(const BlockVector&, const BlockVector&) = default;
};

struct EncodedElement {
    GaussianPrime prime;
    int K = 0;
    BigInt t;
    BigInt b;
    BlockVector block_vector;
};

struct ShellBounds {
    DyadicInterval lower;  // 2^((K-2)^2 / c_h)
    DyadicInterval upper;  // 2^((K-1)^2 / c_h)
    BigInt first_norm;     // smallest integer >= lower
    BigInt last_norm;      // largest integer < upper
};

namespace detail {

inline void require_shell(const ShellConfig& cfg, int K) {
    if (K < cfg.h + 1) throw ShellTooSmall(K, cfg.h);
    if (K > kMaxShell) throw PreconditionViolation("shell K=" + std::to_string(K) + " exceeds supported maximum");
}

/// Enclosure of 2^(e / c_h) whose floor is certified, plus that floor.
inline std::pair<DyadicInterval, BigInt> pow2_over_c(const ShellConfig& cfg, std::int64_t e) {
    std::int64_t w = std::max<std::int64_t>(cfg.precision.initial_bits, 64);
    for (;;) {
        const DyadicInterval c = cfg.c_enclosure(w + 16);
        const DyadicInterval q = divide_positive(DyadicInterval::exact(BigInt(e), 0), c, -(w + 16));
        const DyadicInterval v = exp2_interval(q, w + e);  // e bounds the integer part of q
        if (auto f = certified_floor(v)) return {v, *f};
        w = cfg.precision.escalate(w);
    }
}

}  // namespace detail

/// Enclosures of the P_K window and the integer norm range it admits.
/// The bounds are irrational, so an integer norm never coincides with one.
inline ShellBounds shell_bounds(const ShellConfig& cfg, int K) {
    cfg.validate();
    detail::require_shell(cfg, K);
    auto [lower, lower_floor] = detail::pow2_over_c(cfg, static_cast<std::int64_t>(K - 2) * (K - 2));
    auto [upper, upper_floor] = detail::pow2_over_c(cfg, static_cast<std::int64_t>(K - 1) * (K - 1));
    return {lower, upper, lower_floor + 1, upper_floor};
}

inline bool in_shell(const ShellBounds& sb, std::uint64_t norm) {
    return BigInt(norm) >= sb.first_norm && BigInt(norm) <= sb.last_norm;
}

inline std::vector<GaussianPrime> primes_in_shell(const ShellConfig& cfg, int K) {
    const ShellBounds sb = shell_bounds(cfg, K);
    if (sb.last_norm < sb.first_norm) return {};
    if (sb.last_norm > BigInt(cfg.sieve_cap))
        throw SearchBudgetExceeded("shell K=" + std::to_string(K) + " needs norms up to " + sb.last_norm.str() +
                                   ", above the sieve cap " + std::to_string(cfg.sieve_cap));
    std::vector<GaussianPrime> out;
    for (std::uint64_t p : primes_1_mod_4(static_cast<std::uint64_t>(sb.first_norm),
                                          static_cast<std::uint64_t>(sb.last_norm), cfg.sieve_cap))
        out.push_back(decompose_prime(p));
    return out;
}

/// Splits the K^2-digit truncation T = floor(alpha theta 2^(K^2)) into blocks.
inline BlockVector blocks_from_truncation(const BigInt& truncation, int K) {
    BlockVector bv;
    bv.K = K;
    bv.blocks.resize(static_cast<std::size_t>(K));
    for (int j = 1; j <= K; ++j) {
        const unsigned shift = static_cast<unsigned>(K * K - j * j);
        const BigInt mask = pow2(2 * j - 1) - 1;
        bv.blocks[static_cast<std::size_t>(j - 1)] = static_cast<std::uint64_t>((truncation >> shift) & mask);
    }
    return bv;
}

/// sum_j Delta_j 2^(K^2 - j^2), the truncation as an integer.
inline BigInt truncation_from_blocks(const BlockVector& bv) {
    BigInt t = 0;
    for (int j = 1; j <= bv.K; ++j)
        t += BigInt(bv.blocks[static_cast<std::size_t>(j - 1)]) << static_cast<unsigned>(bv.K * bv.K - j * j);
    return t;
}

inline BigInt assemble_b(const BlockVector& bv, int d) {
    BigInt b = pow2(marker_position(bv.K, d));
    for (int j = 1; j <= bv.K; ++j)
        b += BigInt(bv.blocks[static_cast<std::size_t>(j - 1)]) << static_cast<unsigned>(block_offset(j, d));
    return b;
}

inline EncodedElement encode_blocks(const GaussianPrime& p, BlockVector bv, int d) {
    EncodedElement e;
    e.prime = p;
    e.K = bv.K;
    e.t = pow2(marker_position(bv.K, d));
    e.b = assemble_b(bv, d);
    e.block_vector = std::move(bv);
    return e;
}

inline BlockVector truncated_expansion(const ShellConfig& cfg, const GaussianPrime& p, int K) {
    const ShellBounds sb = shell_bounds(cfg, K);
    if (!in_shell(sb, p.norm))
        throw PreconditionViolation("prime of norm " + std::to_string(p.norm) + " is not in shell " + std::to_string(K));
    return blocks_from_truncation(alpha_theta_truncation(p, cfg.alpha, static_cast<std::int64_t>(K) * K, cfg.precision),
                                  K);
}

inline EncodedElement encode_element(const ShellConfig& cfg, const GaussianPrime& p, int K) {
    return encode_blocks(p, truncated_expansion(cfg, p, K), cfg.d());
}

/// Recovers (K, blocks) from b; rejects anything encode_element cannot produce.
inline BlockVector decode_element(const ShellConfig& cfg, const BigInt& b) {
    const int d = cfg.d();
    if (b <= 0) throw MalformedEncoding("encoded value must be positive");
    const std::int64_t top = bit_length(b) - 1;
    int K = -1;
    for (int k = cfg.h + 1; k <= kMaxShell && marker_position(k, d) <= top; ++k)
        if (marker_position(k, d) == top) K = k;
    if (K < 0) throw MalformedEncoding("highest bit " + std::to_string(top) + " is not a shell marker position");
    BlockVector bv;
    bv.K = K;
    for (int j = 1; j <= K; ++j) {
        const BigInt mask = pow2(2 * j - 1) - 1;
        bv.blocks.push_back(static_cast<std::uint64_t>((b >> static_cast<unsigned>(block_offset(j, d))) & mask));
    }
    if (assemble_b(bv, d) != b) throw MalformedEncoding("bits set outside block windows");
    return bv;
}

/// B_{alpha,K}: one encoded element per prime of P_K.
inline std::vector<EncodedElement> build_shell(const ShellConfig& cfg, int K) {
    std::vector<EncodedElement> out;
    for (const GaussianPrime& p : primes_in_shell(cfg, K)) {
        BlockVector bv = blocks_from_truncation(
            alpha_theta_truncation(p, cfg.alpha, static_cast<std::int64_t>(K) * K, cfg.precision), K);
        out.push_back(encode_blocks(p, std::move(bv), cfg.d()));
    }
    return out;
}

using Shells = std::map<int, std::vector<EncodedElement>>;

/// Primes and cached theta enclosures for shells k_min..k_max, reusable
/// across many values of alpha.
class SequenceBuilder {
public:
    SequenceBuilder(int h, int k_min, int k_max, PrecisionPolicy precision = {},
                    std::uint64_t sieve_cap = kDefaultSieveCap)
        : h_(h), k_min_(k_min), k_max_(k_max) {
        ShellConfig cfg = make_config(h);
        cfg.precision = precision;
        cfg.sieve_cap = sieve_cap;
        precision_ = precision;
        detail::require_shell(cfg, k_min);
        if (k_max < k_min) throw PreconditionViolation("k_max < k_min");
        const ShellBounds top = shell_bounds(cfg, k_max);
        if (top.last_norm > BigInt(sieve_cap))
            throw SearchBudgetExceeded("shell K=" + std::to_string(k_max) + " needs norms up to " + top.last_norm.str() +
                                       ", above the sieve cap " + std::to_string(sieve_cap));
        const std::int64_t bits = std::max<std::int64_t>(static_cast<std::int64_t>(k_max) * k_max + 40, 64);
        for (int K = k_min; K <= k_max; ++K) {
            auto& slot = shells_[K];
            for (const GaussianPrime& p : primes_in_shell(cfg, K)) slot.push_back({p, theta_interval(p, bits, precision)});
        }
    }

    int h() const { return h_; }
    int k_min() const { return k_min_; }
    int k_max() const { return k_max_; }

    std::size_t shell_size(int K) const {
        auto it = shells_.find(K);
        return it == shells_.end() ? 0 : it->second.size();
    }

    std::vector<GaussianPrime> primes(int K) const {
        std::vector<GaussianPrime> out;
        if (auto it = shells_.find(K); it != shells_.end())
            for (const auto& s : it->second) out.push_back(s.prime);
        return out;
    }

    /// Shells k_min..k_top (default k_max) for the given alpha.
    Shells encode(const ExactRational& alpha, int k_top = -1) const {
        require_alpha(alpha);
        if (k_top < 0) k_top = k_max_;
        const int d = make_config(h_).d();
        Shells out;
        for (int K = k_min_; K <= std::min(k_top, k_max_); ++K) {
            auto& dst = out[K];
            const auto& src = shells_.at(K);
            dst.reserve(src.size());
            for (const auto& s : src) {
                DyadicInterval hint = s.theta;
                BigInt t = alpha_theta_truncation(s.prime, alpha, static_cast<std::int64_t>(K) * K, precision_, &hint);
                dst.push_back(encode_blocks(s.prime, blocks_from_truncation(t, K), d));
            }
        }
        return out;
    }

private:
    struct Slot {
        GaussianPrime prime;
        DyadicInterval theta;
    };
    int h_;
    int k_min_;
    int k_max_;
    PrecisionPolicy precision_;
    std::map<int, std::vector<Slot>> shells_;
};

inline Shells build_shells(const ShellConfig& cfg, int k_min, int k_max) {
    return SequenceBuilder(cfg.h, k_min, k_max, cfg.precision, cfg.sieve_cap).encode(cfg.alpha);
}

inline std::vector<EncodedElement> flatten(const Shells& shells) {
    std::vector<EncodedElement> out;
    for (const auto& [K, v] : shells) out.insert(out.end(), v.begin(), v.end());
    return out;
}

}  // namespace bhforge
