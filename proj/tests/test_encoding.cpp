#include "bhforge/encoding.hpp"
#include "oracle_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bhforge;

namespace {

GaussianPrime gp(std::uint64_t a, std::uint64_t b) { return {a, b, a * a + b * b}; }

std::uint64_t window(const BigInt& v, std::int64_t offset, std::int64_t width) {
    return static_cast<std::uint64_t>((v >> static_cast<unsigned>(offset)) & (pow2(width) - 1));
}

}  // namespace

TEST(Config, ShellConstant) {
    for (int h = 2; h <= 4; ++h) {
        const ShellConfig cfg = make_config(h);
        const DyadicInterval c = cfg.c_enclosure(100);
        EXPECT_TRUE(oracle::tight(c, 100));
        // c^2 - 2(h-1)c - 1 = 0
        const auto k = cfg.c_poly();
        const DyadicInterval r = DyadicInterval::exact(k[0]) + DyadicInterval::exact(k[1]) * c + c * c;
        EXPECT_LE(r.lo_double(), 0.0);
        EXPECT_GE(r.hi_double(), 0.0);
        EXPECT_NEAR(r.mid_double(), 0.0, 1e-25);
    }
    EXPECT_TRUE(oracle::consistent(make_config(2).c_enclosure(100), "2.414213562373095048801688724209698078570", 29));
    EXPECT_TRUE(oracle::consistent(make_config(3).c_enclosure(100), "4.236067977499789696409173668731276235441", 29));
    EXPECT_TRUE(oracle::consistent(make_config(4).c_enclosure(100), "6.16227766016837933199889354443271853372", 29));
    EXPECT_EQ(make_config(2).d(), 1);
    EXPECT_EQ(make_config(3).d(), 2);
    EXPECT_EQ(make_config(4).d(), 2);
}

TEST(Config, RejectsBadParameters) {
    EXPECT_THROW(make_config(1), PreconditionViolation);
    EXPECT_THROW(make_config(5), PreconditionViolation);
    EXPECT_THROW(make_config(2, ExactRational(5, 2)), PreconditionViolation);
    EXPECT_THROW(make_config(2, ExactRational(1, 2)), PreconditionViolation);
    EXPECT_NO_THROW(make_config(2, ExactRational(2)));
}

TEST(Layout, OffsetsAndMarkers) {
    EXPECT_EQ(marker_position(4, 1), 30);
    EXPECT_EQ(marker_position(4, 2), 39);
    for (int d = 1; d <= 2; ++d)
        for (int j = 1; j < 20; ++j) {
            // Block j (width 2j-1) plus a gap of 2d+1 bits ends where block j+1 starts.
            EXPECT_EQ(block_offset(j + 1, d) - block_offset(j, d), 2 * j - 1 + 2 * d + 1);
            // The marker of shell j sits d+1 bits into window j+1.
            EXPECT_EQ(marker_position(j, d), block_offset(j + 1, d) + d + 1);
        }
}

TEST(Shells, BoundsMatchReference) {
    const ShellBounds b = shell_bounds(make_config(2), 4);
    EXPECT_TRUE(oracle::consistent(b.lower, "3.153282114908761697", 15));
    EXPECT_TRUE(oracle::consistent(b.upper, "13.250014757131928702", 15));
    EXPECT_EQ(b.first_norm, 4);
    EXPECT_EQ(b.last_norm, 13);
    const ShellBounds b3 = shell_bounds(make_config(3), 5);
    EXPECT_TRUE(oracle::consistent(b3.lower, "4.3608573468693549498", 15));
    EXPECT_TRUE(oracle::consistent(b3.upper, "13.709344058236618623", 15));
    const ShellBounds b9 = shell_bounds(make_config(2), 9);
    EXPECT_EQ(b9.first_norm, 1287789);
    EXPECT_EQ(b9.last_norm, 95544400);
}

TEST(Shells, PrimeMembership) {
    const auto p4 = primes_in_shell(make_config(2), 4);
    ASSERT_EQ(p4.size(), 2u);
    EXPECT_EQ(p4[0], gp(2, 1));
    EXPECT_EQ(p4[1], gp(3, 2));
    const auto p5 = primes_in_shell(make_config(3), 5);
    ASSERT_EQ(p5.size(), 2u);
    EXPECT_EQ(p5[1].norm, 13u);
    EXPECT_EQ(primes_in_shell(make_config(2), 8).size(), 47880u);
    // Consecutive shells tile the norms.
    const ShellConfig cfg = make_config(3);
    for (int K = 4; K < 10; ++K) EXPECT_EQ(shell_bounds(cfg, K).last_norm + 1, shell_bounds(cfg, K + 1).first_norm);
}

TEST(Shells, Preconditions) {
    EXPECT_THROW(shell_bounds(make_config(2), 2), ShellTooSmall);
    EXPECT_THROW(shell_bounds(make_config(4), 4), ShellTooSmall);
    EXPECT_NO_THROW(shell_bounds(make_config(4), 5));
    EXPECT_THROW(shell_bounds(make_config(2), kMaxShell + 1), PreconditionViolation);
    ShellConfig capped = make_config(2);
    capped.sieve_cap = 1000;
    EXPECT_THROW(primes_in_shell(capped, 7), SearchBudgetExceeded);
    EXPECT_THROW(SequenceBuilder(2, 3, 10), SearchBudgetExceeded);
    EXPECT_THROW(encode_element(make_config(2), gp(4, 1), 4), PreconditionViolation);  // norm 17 is in shell 5
}

TEST(Encode, WorkedExample) {
    const EncodedElement e = encode_element(make_config(2), gp(2, 1), 4);
    EXPECT_EQ(e.block_vector.blocks, (std::vector<std::uint64_t>{0, 1, 5, 100}));
    EXPECT_EQ(to_hex(e.b), "41901410");
    EXPECT_EQ(e.t, pow2(30));
}

TEST(Encode, TruncationMatchesReferenceDigits) {
    // 1000 + 9i has norm 1000081, inside shell 8 for h = 2; the 64-digit
    // truncation is the top of the 200-digit reference.
    const ShellConfig cfg = make_config(2);
    const EncodedElement e = encode_element(cfg, gp(1000, 9), 8);
    const BigInt t200 = from_hex("5ddef161c414f343e1abd4c6cd5abc0050c367dc73d7eb73");
    EXPECT_EQ(truncation_from_blocks(e.block_vector), t200 >> 136);
}

TEST(Decode, MarkerOnlyAndMalformed) {
    const ShellConfig cfg = make_config(2);
    const BlockVector bv = decode_element(cfg, pow2(30));
    EXPECT_EQ(bv.K, 4);
    EXPECT_EQ(bv.blocks, (std::vector<std::uint64_t>(4, 0)));
    EXPECT_THROW(decode_element(cfg, pow2(30) + 2), MalformedEncoding);  // gap bit
    EXPECT_THROW(decode_element(cfg, pow2(31)), MalformedEncoding);      // not a marker
    EXPECT_THROW(decode_element(cfg, BigInt(0)), MalformedEncoding);
    EXPECT_THROW(decode_element(cfg, pow2(marker_position(2, 1))), MalformedEncoding);  // shell below h+1
}

class EncodingRoundTrip : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(EncodingRoundTrip, DecodeInvertsEncode) {
    const auto [h, k_lo, k_hi] = GetParam();
    std::mt19937_64 rng(static_cast<std::uint64_t>(h));
    std::uniform_int_distribution<std::int64_t> num(256, 512);
    for (int rep = 0; rep < 3; ++rep) {
        const ShellConfig cfg = make_config(h, ExactRational(num(rng), 256));
        const Shells shells = build_shells(cfg, k_lo, k_hi);
        for (const auto& [K, v] : shells) {
            const ShellBounds sb = shell_bounds(cfg, K);
            for (const EncodedElement& e : v) {
                EXPECT_EQ(decode_element(cfg, e.b), e.block_vector);
                EXPECT_TRUE(in_shell(sb, e.prime.norm));
                EXPECT_EQ(bit_length(e.b) - 1, marker_position(K, cfg.d()));
                EXPECT_EQ(e.block_vector.blocks.front(), 0u);  // alpha theta < 1/4
                EXPECT_EQ(truncation_from_blocks(e.block_vector),
                          alpha_theta_truncation(e.prime, cfg.alpha, static_cast<std::int64_t>(K) * K));
                for (int j = 1; j <= K; ++j)
                    EXPECT_LT(e.block_vector.blocks[static_cast<std::size_t>(j - 1)], std::uint64_t{1} << (2 * j - 1));
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Shells, EncodingRoundTrip,
                         ::testing::Values(std::make_tuple(2, 3, 7), std::make_tuple(3, 4, 8),
                                           std::make_tuple(4, 5, 9)));

TEST(Encode, BuilderAgreesWithDirectEncoding) {
    const SequenceBuilder builder(2, 3, 7);
    for (auto alpha : {ExactRational(1), ExactRational(77, 64), ExactRational(2)}) {
        ShellConfig cfg = make_config(2, alpha);
        const Shells viaBuilder = builder.encode(alpha);
        for (int K = 3; K <= 7; ++K) {
            const auto direct = build_shell(cfg, K);
            ASSERT_EQ(direct.size(), viaBuilder.at(K).size());
            for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_EQ(direct[i].b, viaBuilder.at(K)[i].b);
        }
        EXPECT_EQ(builder.encode(alpha, 5).size(), 3u);
    }
}

TEST(Encode, SumsOfAtMostHElementsDoNotCarry) {
    // Window j of a sum of <= h elements is the sum of their Delta_j plus
    // 2^(d+1) for every summand from shell j-1.
    for (int h = 2; h <= 4; ++h) {
        const ShellConfig cfg = make_config(h, ExactRational(3, 2));
        const auto all = flatten(build_shells(cfg, h + 1, h + 5));
        const int d = cfg.d();
        std::mt19937_64 rng(static_cast<std::uint64_t>(100 + h));
        std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
        std::uniform_int_distribution<int> count(1, h);
        for (int rep = 0; rep < 2000; ++rep) {
            std::vector<const EncodedElement*> xs;
            const int n = count(rng);
            BigInt s = 0;
            for (int i = 0; i < n; ++i) {
                xs.push_back(&all[pick(rng)]);
                s += xs.back()->b;
            }
            const int k_top = h + 6;
            for (int j = 1; j <= k_top; ++j) {
                std::uint64_t expect = 0;
                for (auto* e : xs) {
                    if (e->K >= j) expect += e->block_vector.blocks[static_cast<std::size_t>(j - 1)];
                    if (e->K == j - 1) expect += std::uint64_t{1} << (d + 1);
                }
                EXPECT_EQ(window(s, block_offset(j, d), 2 * j + 2 * d), expect) << "h=" << h << " j=" << j;
            }
        }
    }
}
