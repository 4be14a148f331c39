#include "bhforge/collisions.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

using namespace bhforge;

namespace {

using Multiset = std::vector<std::uint64_t>;  // values, non-increasing

/// All pairs of disjoint l-multisets (l = 2..h) with equal sums, as value
/// multisets with the lexicographically larger side first.
std::set<std::pair<Multiset, Multiset>> naive_collisions(const std::vector<std::uint64_t>& v, int h) {
    std::set<std::pair<Multiset, Multiset>> out;
    for (int l = 2; l <= h; ++l) {
        std::map<std::uint64_t, std::vector<Multiset>> by_sum;
        Multiset cur;
        auto rec = [&](auto&& self, std::size_t from, std::uint64_t s) -> void {
            if (static_cast<int>(cur.size()) == l) {
                Multiset m = cur;
                std::sort(m.rbegin(), m.rend());
                by_sum[s].push_back(m);
                return;
            }
            for (std::size_t i = from; i < v.size(); ++i) {
                cur.push_back(v[i]);
                self(self, i, s + v[i]);
                cur.pop_back();
            }
        };
        rec(rec, 0, 0);
        for (auto& [s, ms] : by_sum)
            for (std::size_t i = 0; i < ms.size(); ++i)
                for (std::size_t j = i + 1; j < ms.size(); ++j) {
                    bool disjoint = true;
                    for (auto x : ms[i])
                        if (std::find(ms[j].begin(), ms[j].end(), x) != ms[j].end()) disjoint = false;
                    if (disjoint) out.insert(ms[i] > ms[j] ? std::make_pair(ms[i], ms[j]) : std::make_pair(ms[j], ms[i]));
                }
    }
    return out;
}

template <class Value>
std::set<std::pair<Multiset, Multiset>> as_values(const std::vector<SumCollision>& cs, const std::vector<Value>& v) {
    std::set<std::pair<Multiset, Multiset>> out;
    for (const auto& c : cs) {
        Multiset x, y;
        for (auto i : c.left) x.push_back(static_cast<std::uint64_t>(v[i]));
        for (auto i : c.right) y.push_back(static_cast<std::uint64_t>(v[i]));
        out.insert({x, y});
    }
    return out;
}

std::set<std::pair<std::vector<BigInt>, std::vector<BigInt>>> record_values(const std::vector<CollisionRecord>& rs) {
    std::set<std::pair<std::vector<BigInt>, std::vector<BigInt>>> out;
    for (const auto& r : rs) {
        std::vector<BigInt> x, y;
        for (const auto& e : r.left) x.push_back(e.b);
        for (const auto& e : r.right) y.push_back(e.b);
        out.insert({x, y});
    }
    return out;
}

std::set<std::pair<std::vector<BigInt>, std::vector<BigInt>>> brute_values(const std::vector<EncodedElement>& el,
                                                                          int h) {
    std::vector<BigInt> b;
    for (const auto& e : el) b.push_back(e.b);
    std::set<std::pair<std::vector<BigInt>, std::vector<BigInt>>> out;
    for (const auto& c : find_sum_collisions(b, h)) {
        std::vector<BigInt> x, y;
        for (auto i : c.left) x.push_back(b[i]);
        for (auto i : c.right) y.push_back(b[i]);
        out.insert({x, y});
    }
    return out;
}

/// Shells of valid encodings with small random blocks, so repeated sums are
/// common. The primes are placeholders with large norms.
Shells synthetic_shells(int h, int k_lo, int k_hi, std::size_t per_shell, std::uint64_t max_block, std::uint64_t seed) {
    const int d = make_config(h).d();
    std::mt19937_64 rng(seed);
    Shells out;
    std::uint64_t serial = 0;
    for (int K = k_lo; K <= k_hi; ++K) {
        std::set<std::vector<std::uint64_t>> used;
        while (out[K].size() < per_shell) {
            BlockVector bv{K, std::vector<std::uint64_t>(static_cast<std::size_t>(K), 0)};
            for (int j = 2; j <= K; ++j)
                bv.blocks[static_cast<std::size_t>(j - 1)] =
                    std::uniform_int_distribution<std::uint64_t>(0, std::min(max_block, (std::uint64_t{1} << (2 * j - 1)) - 1))(rng);
            if (!used.insert(bv.blocks).second) continue;
            ++serial;
            const GaussianPrime fake{(std::uint64_t{1} << 30) + serial, serial, (std::uint64_t{1} << 60) + serial};
            out[K].push_back(encode_blocks(fake, std::move(bv), d));
        }
    }
    return out;
}

}  // namespace

TEST(SumCollisions, SmallExample) {
    const std::vector<std::uint64_t> v{1, 2, 3, 4};
    // Sums with repetition count: 2 + 2 = 1 + 3 and 3 + 3 = 2 + 4 as well.
    const auto two = find_sum_collisions(v, 2);
    EXPECT_EQ(as_values(two, v),
              (std::set<std::pair<Multiset, Multiset>>{{{4, 1}, {3, 2}}, {{3, 1}, {2, 2}}, {{4, 2}, {3, 3}}}));
    const std::vector<std::uint64_t> distinct_only{1, 4, 6, 9};
    EXPECT_EQ(as_values(find_sum_collisions(distinct_only, 2), distinct_only),
              (std::set<std::pair<Multiset, Multiset>>{{{9, 1}, {6, 4}}}));
    EXPECT_EQ(as_values(find_sum_collisions(v, 3), v), naive_collisions(v, 3));
    EXPECT_TRUE(find_sum_collisions(std::vector<std::uint64_t>{1, 2, 5, 11}, 2).empty());
    EXPECT_THROW(find_sum_collisions(v, 5), PreconditionViolation);
}

TEST(SumCollisions, AgreesWithNaiveOracle) {
    std::mt19937_64 rng(3);
    for (int h = 2; h <= 4; ++h)
        for (int rep = 0; rep < 20; ++rep) {
            std::set<std::uint64_t> s;
            std::uniform_int_distribution<std::uint64_t> val(0, 60);
            while (s.size() < 9) s.insert(val(rng));
            const std::vector<std::uint64_t> v(s.begin(), s.end());
            EXPECT_EQ(as_values(find_sum_collisions(v, h), v), naive_collisions(v, h)) << "h=" << h;
        }
}

TEST(SumCollisions, FingerprintCollisionsAreConfirmedExactly) {
    // Sums agree modulo 2^64 but not exactly.
    const BigInt big = pow2(64);
    const std::vector<BigInt> v{BigInt(1), BigInt(4), big + 2, BigInt(3) + big};
    const auto cs = find_sum_collisions(v, 2);
    EXPECT_TRUE(cs.empty());
    const std::vector<BigInt> w{BigInt(1), big + 4, big + 2, BigInt(3)};
    EXPECT_EQ(find_sum_collisions(w, 2).size(), 1u);
}

TEST(SumCollisions, BudgetIsEnforced) {
    std::vector<std::uint64_t> v(200);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i * i;
    EXPECT_THROW(find_sum_collisions(v, 3, SearchOptions{1000}), SearchBudgetExceeded);
    SearchStats st;
    EXPECT_NO_THROW(find_sum_collisions(v, 2, SearchOptions{30000}, &st));
    EXPECT_EQ(st.enumerations, 200u * 201 / 2);
}

class StratifiedSearch : public ::testing::TestWithParam<int> {};

TEST_P(StratifiedSearch, SyntheticShellsMatchBruteForce) {
    const int h = GetParam();
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const Shells shells = synthetic_shells(h, h + 1, h + 4, 14, 3, seed);
        const auto el = flatten(shells);
        const auto found = find_collisions(el, h);
        EXPECT_FALSE(found.empty());
        EXPECT_EQ(record_values(found), brute_values(el, h)) << "h=" << h << " seed=" << seed;
    }
}

TEST_P(StratifiedSearch, RealShellsMatchBruteForce) {
    const int h = GetParam();
    const int k_max = h == 2 ? 7 : h + 5;
    const SequenceBuilder builder(h, h + 1, k_max);
    const std::int64_t steps = h == 4 ? 2 : 8;
    for (std::int64_t i = 0; i <= steps; ++i) {
        const ExactRational alpha(steps + i, steps);
        const auto el = flatten(builder.encode(alpha));
        EXPECT_GT(el.size(), 100u);
        SearchStats st;
        EXPECT_EQ(record_values(find_collisions(el, h, {}, &st)), brute_values(el, h));
    }
}

INSTANTIATE_TEST_SUITE_P(H, StratifiedSearch, ::testing::Values(2, 3, 4));

TEST(Collisions, RecordsAreCanonical) {
    const auto el = flatten(synthetic_shells(3, 4, 7, 12, 3, 42));
    for (const auto& r : find_collisions(el, 3)) {
        ASSERT_EQ(static_cast<int>(r.left.size()), r.l);
        BigInt sl = 0, sr = 0;
        for (std::size_t i = 0; i < r.left.size(); ++i) {
            sl += r.left[i].b;
            sr += r.right[i].b;
            if (i > 0) {
                EXPECT_GE(r.left[i - 1].b, r.left[i].b);
                EXPECT_GE(r.right[i - 1].b, r.right[i].b);
            }
            EXPECT_EQ(r.shells[i], r.left[i].K);
        }
        EXPECT_EQ(sl, sr);
        EXPECT_GT(r.left.front().b, r.right.front().b);
        EXPECT_EQ(r.largest().b, r.left.front().b);
        EXPECT_EQ(r.top_shell(), r.left.front().K);
    }
}

TEST(Collisions, InputOrderDoesNotMatter) {
    auto el = flatten(synthetic_shells(2, 3, 6, 15, 3, 9));
    const auto base = record_values(find_collisions(el, 2));
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        std::shuffle(el.begin(), el.end(), rng);
        EXPECT_EQ(record_values(find_collisions(el, 2)), base);
    }
}

TEST(Collisions, RejectsDuplicates) {
    auto el = flatten(synthetic_shells(2, 3, 5, 4, 3, 1));
    el.push_back(el.front());
    EXPECT_THROW(find_collisions(el, 2), PreconditionViolation);
}

TEST(Collisions, BudgetIsEnforced) {
    const auto el = flatten(synthetic_shells(3, 4, 6, 30, 3, 2));
    EXPECT_THROW(find_collisions(el, 3, SearchOptions{100}), SearchBudgetExceeded);
}

TEST(Clean, RemovesLargestOfEachRepeatedSum) {
    for (int h = 2; h <= 3; ++h) {
        const Shells shells = synthetic_shells(h, h + 1, h + 4, 12, 3, 77);
        const auto records = find_collisions(flatten(shells), h);
        const auto bad = bad_elements(shells, h);
        std::set<BigInt> bad_b;
        for (const auto& [K, v] : bad)
            for (const auto& e : v) {
                EXPECT_EQ(e.K, K);
                bad_b.insert(e.b);
            }
        std::set<BigInt> expected;
        for (const auto& r : records) expected.insert(r.largest().b);
        EXPECT_EQ(bad_b, expected);

        const auto clean = clean_sequence(shells, h);
        EXPECT_EQ(clean.size() + bad_b.size(), flatten(shells).size());
        std::vector<BigInt> cb;
        for (const auto& e : clean) cb.push_back(e.b);
        EXPECT_TRUE(std::is_sorted(cb.begin(), cb.end()));
        EXPECT_TRUE(find_sum_collisions(cb, h).empty()) << "h=" << h;
    }
}

TEST(Counting, CountingFunction) {
    const std::vector<BigInt> s{BigInt(2), BigInt(3), BigInt(5), BigInt(8)};
    EXPECT_EQ(counting_function(s, BigInt(1)), 0u);
    EXPECT_EQ(counting_function(s, BigInt(5)), 3u);
    EXPECT_EQ(counting_function(s, BigInt(100)), 4u);
}

TEST(Counting, SlopeCalibration) {
    std::vector<BigInt> all, squares;
    for (int i = 1; i <= 1 << 16; ++i) all.push_back(i);
    for (std::int64_t i = 1; i <= 1 << 12; ++i) squares.push_back(BigInt(i * i));
    std::vector<BigInt> xs;
    for (int k = 4; k <= 16; k += 2) xs.push_back(pow2(k));
    EXPECT_NEAR(loglog_slope(all, xs).slope, 1.0, 1e-12);
    EXPECT_NEAR(loglog_slope(squares, xs).slope, 0.5, 0.01);
    EXPECT_THROW(loglog_slope(all, {BigInt(0)}), InsufficientData);
}

TEST(Counting, ShellOfMarker) {
    EXPECT_EQ(shell_of(pow2(30), 2), 4);
    EXPECT_EQ(shell_of(pow2(39) + 5, 3), 4);
    EXPECT_EQ(shell_of(pow2(31), 2), -1);
}

TEST(Counting, ExponentEstimateOnSyntheticSequence) {
    const auto el = flatten(synthetic_shells(2, 3, 7, 10, 3, 4));
    std::vector<BigInt> b;
    for (const auto& e : el) b.push_back(e.b);
    std::sort(b.begin(), b.end());
    const ExponentEstimate est = exponent_estimate(b, 2);
    EXPECT_NEAR(est.target, 0.41421356237309503, 1e-12);
    EXPECT_EQ(est.points.size(), 5u);
    // 10 elements per shell: B(x_K) = 10 (K - 2), against log2 x_K ~ K^2.
    EXPECT_GT(est.slope, 0.0);
    std::vector<BigInt> three(b.begin(), b.begin() + 30);
    EXPECT_THROW(exponent_estimate(three, 2), InsufficientData);
    EXPECT_THROW(exponent_estimate({}, 2), InsufficientData);
}
