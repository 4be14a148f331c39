#include "bhforge/dyadic.hpp"
#include "oracle_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace bhforge;

namespace {

const char* kPi = "3.141592653589793238462643383279502884197";
const char* kLn2 = "0.6931471805599453094172321214581765680755";
const char* kE = "2.718281828459045235360287471352662497757";

}  // namespace

TEST(Constants, PiMatchesReference) {
    for (std::int64_t w : {32, 64, 100, 120}) {
        const DyadicInterval p = pi_interval(w);
        EXPECT_TRUE(oracle::consistent(p, kPi, 38)) << w;
        EXPECT_TRUE(oracle::tight(p, w - 2)) << w;
    }
}

TEST(Constants, Ln2MatchesReference) {
    const DyadicInterval l = ln2_interval(120);
    EXPECT_TRUE(oracle::consistent(l, kLn2, 38));
    EXPECT_TRUE(oracle::tight(l, 118));
}

TEST(Exp, SmallArguments) {
    const DyadicInterval e = exp_small(DyadicInterval::exact(1), 120);
    EXPECT_TRUE(oracle::consistent(e, kE, 36));
    EXPECT_TRUE(oracle::tight(e, 110));
    // 0.3 is not dyadic; enclose it first.
    const DyadicInterval y = scale_rational(DyadicInterval::exact(3), 1, 10, -130);
    EXPECT_TRUE(oracle::consistent(exp_small(y, 120), "1.349858807576003103983744313328007330378", 36));
    EXPECT_THROW(exp_small(DyadicInterval::exact(2), 64), PreconditionViolation);
}

TEST(Exp, PowersOfTwo) {
    // 2^(1/3), 2^(201/2), 2^(-37/4)
    const DyadicInterval third = scale_rational(DyadicInterval::exact(1), 1, 3, -140);
    EXPECT_TRUE(oracle::consistent(exp2_interval(third, 120), "1.25992104989487316476721060727822835057", 35));
    EXPECT_TRUE(oracle::consistent(exp2_interval(DyadicInterval::exact(201, -1), 120),
                                   "1792728671193156477399422023278.661496394", 2));
    EXPECT_TRUE(oracle::consistent(exp2_interval(DyadicInterval::exact(-37, -2), 120),
                                   "0.00164237581104241121685766694577", 30));
    // Integer exponents are exact.
    const DyadicInterval eight = exp2_interval(DyadicInterval::exact(3), 64);
    EXPECT_EQ(certified_floor(eight), BigInt(8));
}

TEST(Sqrt, IntegerRoots) {
    const DyadicInterval s = sqrt_interval(BigInt(49), 40);
    EXPECT_TRUE(s.is_exact());
    EXPECT_EQ(s.lo, BigInt(7) << 40);
    const DyadicInterval r2 = sqrt_interval(BigInt(2), 100);
    EXPECT_TRUE(oracle::consistent(r2, "1.414213562373095048801688724209698078570", 29));
    EXPECT_TRUE(oracle::tight(r2, 100));
}

TEST(Turns, AxisAndDiagonalAreExact) {
    struct Case {
        int x, y;
        int eighths;
    } cases[] = {{1, 0, 0}, {5, 5, 1}, {0, 3, 2}, {-2, 2, 3}, {-7, 0, 4}, {-1, -1, 5}, {0, -4, 6}, {9, -9, 7}};
    for (const auto& c : cases) {
        const DyadicInterval t = turns_interval(BigInt(c.x), BigInt(c.y), 64);
        ASSERT_TRUE(t.is_exact()) << c.x << "," << c.y;
        EXPECT_EQ(compare_scaled(t.lo, t.exponent, BigInt(c.eighths), -3), 0) << c.x << "," << c.y;
    }
    EXPECT_THROW(turns_interval(0, 0, 64), PreconditionViolation);
}

TEST(Turns, QuadrantsMatchReference) {
    EXPECT_TRUE(oracle::consistent(turns_interval(-3, 4, 100), "0.352416382349566725824598923775", 29));
    EXPECT_TRUE(oracle::consistent(turns_interval(3, -4, 100), "0.852416382349566725824598923775", 29));
}

TEST(Turns, AgreesWithAtan2AndNests) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> coord(-5000, 5000);
    for (int i = 0; i < 500; ++i) {
        const int x = coord(rng), y = coord(rng);
        if (x == 0 && y == 0) continue;
        const DyadicInterval coarse = turns_interval(x, y, 40);
        const DyadicInterval fine = turns_interval(x, y, 160);
        EXPECT_TRUE(contains(coarse, fine)) << x << "," << y;
        EXPECT_TRUE(oracle::tight(fine, 158));
        double ref = std::atan2(static_cast<double>(y), static_cast<double>(x)) / (2 * std::numbers::pi);
        if (ref < 0) ref += 1;
        EXPECT_NEAR(fine.mid_double(), ref, 1e-12) << x << "," << y;
    }
}

TEST(Arithmetic, OperationsEncloseExactResults) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> m(-1000, 1000);
    std::uniform_int_distribution<int> ex(-20, 20);
    for (int i = 0; i < 300; ++i) {
        const int a = m(rng), b = m(rng), ea = ex(rng), eb = ex(rng);
        const double xa = std::ldexp(a, ea), xb = std::ldexp(b, eb);
        const DyadicInterval x = DyadicInterval::exact(a, ea), y = DyadicInterval::exact(b, eb);
        EXPECT_DOUBLE_EQ((x + y).mid_double(), xa + xb);
        EXPECT_DOUBLE_EQ((x - y).mid_double(), xa - xb);
        EXPECT_DOUBLE_EQ((x * y).mid_double(), xa * xb);
        if (b > 0) {
            const DyadicInterval q = divide_positive(x, y, -60);
            EXPECT_LE(q.lo_double(), xa / xb + 1e-15 * std::abs(xa / xb));
            EXPECT_GE(q.hi_double(), xa / xb - 1e-15 * std::abs(xa / xb));
            EXPECT_TRUE(oracle::tight(q, 59));
        }
    }
    EXPECT_THROW(divide_positive(DyadicInterval::exact(1), DyadicInterval::exact(0), -10), PreconditionViolation);
}

TEST(Arithmetic, RescaleIsOutward) {
    const DyadicInterval x{BigInt(5), BigInt(7), -4};  // [5/16, 7/16]
    const DyadicInterval r = x.rescaled(-2);           // [1/4, 2/4]
    EXPECT_EQ(r.lo, 1);
    EXPECT_EQ(r.hi, 2);
    EXPECT_TRUE(contains(r, x));
}

TEST(Floor, DecidedOnlyWhenUnambiguous) {
    EXPECT_EQ(certified_floor({BigInt(5), BigInt(7), -2}), BigInt(1));   // [1.25, 1.75]
    EXPECT_FALSE(certified_floor({BigInt(3), BigInt(5), -2}).has_value());  // [0.75, 1.25]
    EXPECT_EQ(certified_floor({BigInt(-5), BigInt(-5), -2}), BigInt(-2));
}

TEST(Distance, NearestIntegerDistance) {
    auto d = distance_to_nearest_integer(DyadicInterval::exact(11, -2));  // 2.75
    ASSERT_TRUE(d);
    EXPECT_DOUBLE_EQ(d->mid_double(), 0.25);
    d = distance_to_nearest_integer(DyadicInterval::exact(-9, -3));  // -1.125
    ASSERT_TRUE(d);
    EXPECT_DOUBLE_EQ(d->mid_double(), 0.125);
    EXPECT_FALSE(distance_to_nearest_integer({BigInt(1), BigInt(3), -2}).has_value());  // straddles 1/2
}

TEST(Policy, EscalationStopsAtCap) {
    PrecisionPolicy p{64, 256};
    EXPECT_EQ(p.escalate(64), 128);
    EXPECT_EQ(p.escalate(128), 256);
    EXPECT_THROW(p.escalate(256), PrecisionCapExceeded);
}
