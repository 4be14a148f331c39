#pragma once

// Repeated h-fold sums among encoded elements: detection, the Bad sets,
// cleaning and the counting function of what is left.

#include "bhforge/bigint.hpp"
#include "bhforge/encoding.hpp"
#include "bhforge/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace bhforge {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 100'000'000;

struct SearchOptions {
    std::uint64_t budget = kDefaultEnumerationBudget;
};

struct SearchStats {
    std::uint64_t enumerations = 0;
    std::uint64_t excluded_strata = 0;  // same-shell strata ruled out by the separation bound
    std::uint64_t exact_checks = 0;
};

/// values[left] and values[right] have equal sums; both sides non-increasing
/// by value, left lexicographically larger.
struct SumCollision {
    int l = 0;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
};

struct CollisionRecord {
    int l = 0;
    std::vector<EncodedElement> left;   // non-increasing by b
    std::vector<EncodedElement> right;  // non-increasing by b
    std::vector<int> shells;            // shells of `left`, non-increasing

    const EncodedElement& largest() const { return left.front().b > right.front().b ? left.front() : right.front(); }
    int top_shell() const { return std::max(left.front().K, right.front().K); }
};

namespace detail {

inline void charge(SearchStats& stats, const SearchOptions& opts, long double count, const char* what) {
    if (static_cast<long double>(stats.enumerations) + count > static_cast<long double>(opts.budget))
        throw SearchBudgetExceeded(std::string(what) + ": enumeration budget of " + std::to_string(opts.budget) +
                                   " exceeded (partial results discarded)");
    stats.enumerations += static_cast<std::uint64_t>(count);
}

inline long double multisets(std::size_t n, int l) {
    long double c = 1;
    for (int i = 0; i < l; ++i) c = c * static_cast<long double>(n + static_cast<std::size_t>(i)) / (i + 1);
    return c;
}

/// Orders both sides by value descending and puts the larger side first.
template <class Value>
SumCollision canonical(int l, std::vector<std::size_t> x, std::vector<std::size_t> y, const std::vector<Value>& v) {
    auto desc = [&](std::size_t i, std::size_t j) { return v[i] > v[j] || (v[i] == v[j] && i < j); };
    std::sort(x.begin(), x.end(), desc);
    std::sort(y.begin(), y.end(), desc);
    bool x_first = false;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (v[x[k]] != v[y[k]]) {
            x_first = v[x[k]] > v[y[k]];
            break;
        }
    }
    if (!x_first) std::swap(x, y);
    return {l, std::move(x), std::move(y)};
}

template <class Value>
bool sum_less(const SumCollision& a, const SumCollision& b, const std::vector<Value>& v) {
    if (a.l != b.l) return a.l < b.l;
    for (std::size_t k = 0; k < a.left.size(); ++k)
        if (v[a.left[k]] != v[b.left[k]]) return v[a.left[k]] > v[b.left[k]];
    for (std::size_t k = 0; k < a.right.size(); ++k)
        if (v[a.right[k]] != v[b.right[k]]) return v[a.right[k]] > v[b.right[k]];
    return false;
}

inline std::uint64_t fingerprint(const BigInt& v) { return low64(v); }
inline std::uint64_t fingerprint(std::uint64_t v) { return v; }

/// All l-multisets of [0, n) with equal exact sums, for one l.
template <class Value>
void brute_force_level(const std::vector<Value>& values, int l, const SearchOptions& opts, SearchStats& stats,
                       std::vector<SumCollision>& out) {
    const std::size_t n = values.size();
    if (n == 0) return;
    charge(stats, opts, multisets(n, l), "find_collisions");
    struct Entry {
        std::uint64_t fp;
        std::array<std::uint32_t, 4> idx;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(multisets(n, l)));
    std::array<std::uint32_t, 4> idx{};
    // Non-decreasing index tuples.
    auto rec = [&](auto&& self, int depth, std::uint32_t from, std::uint64_t fp) -> void {
        if (depth == l) {
            entries.push_back({fp, idx});
            return;
        }
        for (std::uint32_t i = from; i < n; ++i) {
            idx[static_cast<std::size_t>(depth)] = i;
            self(self, depth + 1, i, fp + fingerprint(values[i]));
        }
    };
    rec(rec, 0, 0, 0);
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.fp != b.fp ? a.fp < b.fp : a.idx < b.idx;
    });
    for (std::size_t g = 0; g < entries.size();) {
        std::size_t e = g + 1;
        while (e < entries.size() && entries[e].fp == entries[g].fp) ++e;
        if (e - g >= 2) {
            std::vector<std::pair<BigInt, std::size_t>> sums;
            for (std::size_t k = g; k < e; ++k) {
                BigInt s = 0;
                for (int r = 0; r < l; ++r) s += BigInt(values[entries[k].idx[static_cast<std::size_t>(r)]]);
                sums.emplace_back(std::move(s), k);
            }
            stats.exact_checks += sums.size();
            std::sort(sums.begin(), sums.end());
            for (std::size_t p = 0; p < sums.size(); ++p) {
                for (std::size_t q = p + 1; q < sums.size() && sums[q].first == sums[p].first; ++q) {
                    std::vector<std::size_t> x, y;
                    for (int r = 0; r < l; ++r) {
                        x.push_back(entries[sums[p].second].idx[static_cast<std::size_t>(r)]);
                        y.push_back(entries[sums[q].second].idx[static_cast<std::size_t>(r)]);
                    }
                    bool disjoint = true;
                    for (auto i : x)
                        for (auto j : y)
                            if (values[i] == values[j]) disjoint = false;
                    if (disjoint) out.push_back(canonical(l, std::move(x), std::move(y), values));
                }
            }
        }
        g = e;
    }
}

}  // namespace detail

/// Exhaustive search over l-multisets, l = 2..h, of arbitrary non-negative
/// values. Candidates are grouped by a 64-bit fingerprint of the sum and
/// every reported equality is confirmed on exact sums.
template <class Value>
std::vector<SumCollision> find_sum_collisions(const std::vector<Value>& values, int h, const SearchOptions& opts = {},
                                              SearchStats* stats = nullptr) {
    if (h < 2 || h > 4) throw PreconditionViolation("find_sum_collisions: h must be 2, 3 or 4");
    if (values.size() >= (std::size_t{1} << 32)) throw PreconditionViolation("find_sum_collisions: too many values");
    SearchStats local;
    SearchStats& st = stats != nullptr ? *stats : local;
    std::vector<SumCollision> out;
    for (int l = 2; l <= h; ++l) detail::brute_force_level(values, l, opts, st, out);
    std::sort(out.begin(), out.end(),
              [&](const SumCollision& a, const SumCollision& b) { return detail::sum_less(a, b, values); });
    return out;
}

namespace detail {

/// l = 2 search over encoded elements, stratified by the top shell K*.
/// Per-window equality of the sums (no carries for <= h summands) forces
/// equal counts of shell-K* elements on both sides, so either
///  (i) all four lie in K*: impossible once 14 N_max^2 <= 2^(K*^2), because
///      the argument gap 1/(2 pi |nu|) of the non-real product nu exceeds
///      the 2 * 2^-(K*^2) allowed by equal truncations; else brute force;
///  (ii) one K* element per side: a + b = c + d with b, d below K*, and
///      window K* forces Delta_K*(c) - Delta_K*(a) in {0, +-2^(d+1)}
///      (markers of shell K*-1 land in window K*).
inline std::vector<SumCollision> stratified_pairs(const std::vector<EncodedElement>& el, int d,
                                                  const SearchOptions& opts, SearchStats& stats) {
    std::vector<BigInt> b;
    b.reserve(el.size());
    for (const auto& e : el) b.push_back(e.b);
    std::map<int, std::vector<std::size_t>> by_shell;
    for (std::size_t i = 0; i < el.size(); ++i) by_shell[el[i].K].push_back(i);

    std::set<std::array<std::size_t, 4>> seen;
    std::vector<SumCollision> out;
    auto emit = [&](SumCollision c) {
        std::array<std::size_t, 4> key{c.left[0], c.left[1], c.right[0], c.right[1]};
        if (seen.insert(key).second) out.push_back(std::move(c));
    };

    std::vector<std::size_t> lower;
    for (const auto& [K, top] : by_shell) {
        std::uint64_t n_max = 0;
        for (auto i : top) n_max = std::max(n_max, el[i].prime.norm);
        const BigInt nm(n_max);
        if (14 * nm * nm <= pow2(static_cast<std::int64_t>(K) * K)) {
            ++stats.excluded_strata;
        } else {
            std::vector<BigInt> tb;
            for (auto i : top) tb.push_back(b[i]);
            std::vector<SumCollision> local;
            brute_force_level(tb, 2, opts, stats, local);
            for (auto& c : local) {
                std::vector<std::size_t> x, y;
                for (auto i : c.left) x.push_back(top[i]);
                for (auto i : c.right) y.push_back(top[i]);
                emit(canonical(2, std::move(x), std::move(y), b));
            }
        }

        if (!lower.empty()) {
            const std::uint64_t step = std::uint64_t{1} << (d + 1);
            std::unordered_map<std::uint64_t, std::vector<std::size_t>> bucket;
            for (auto i : top) bucket[el[i].block_vector.blocks.back()].push_back(i);
            std::unordered_map<std::uint64_t, std::vector<std::pair<std::size_t, std::size_t>>> cand;
            std::uint64_t n_cand = 0;
            for (auto a : top) {
                const std::uint64_t da = el[a].block_vector.blocks.back();
                std::vector<std::uint64_t> targets{da, da + step};
                if (da >= step) targets.push_back(da - step);
                for (std::uint64_t target : targets) {
                    auto it = bucket.find(target);
                    if (it == bucket.end()) continue;
                    for (auto c : it->second) {
                        if (c == a) continue;
                        cand[low64(b[c]) - low64(b[a])].push_back({a, c});
                        ++n_cand;
                    }
                }
            }
            const auto m = static_cast<long double>(lower.size());
            charge(stats, opts, m * (m - 1) + static_cast<long double>(n_cand), "find_collisions");
            if (!cand.empty()) {
                std::vector<std::uint64_t> lo(lower.size());
                for (std::size_t k = 0; k < lower.size(); ++k) lo[k] = low64(b[lower[k]]);
                for (std::size_t x = 0; x < lower.size(); ++x) {
                    for (std::size_t y = 0; y < lower.size(); ++y) {
                        if (x == y) continue;
                        auto it = cand.find(lo[x] - lo[y]);
                        if (it == cand.end()) continue;
                        for (auto [a, c] : it->second) {
                            ++stats.exact_checks;
                            if (b[a] + b[lower[x]] == b[c] + b[lower[y]])
                                emit(canonical(2, {a, lower[x]}, {c, lower[y]}, b));
                        }
                    }
                }
            }
        }
        lower.insert(lower.end(), top.begin(), top.end());
    }
    return out;
}

}  // namespace detail

inline CollisionRecord make_record(const SumCollision& c, const std::vector<EncodedElement>& el) {
    CollisionRecord r;
    r.l = c.l;
    for (auto i : c.left) r.left.push_back(el[i]);
    for (auto i : c.right) r.right.push_back(el[i]);
    for (const auto& e : r.left) r.shells.push_back(e.K);
    return r;
}

/// Every nontrivial repeated sum of l = 2..h elements, as canonical records
/// sorted by (l, left b values, right b values). l = 2 uses the shell
/// stratification above; l >= 3 is exhaustive.
inline std::vector<CollisionRecord> find_collisions(const std::vector<EncodedElement>& elements, int h,
                                                    const SearchOptions& opts = {}, SearchStats* stats = nullptr) {
    const ShellConfig cfg = make_config(h);
    {
        std::vector<BigInt> bs;
        for (const auto& e : elements) bs.push_back(e.b);
        std::sort(bs.begin(), bs.end());
        if (std::adjacent_find(bs.begin(), bs.end()) != bs.end())
            throw PreconditionViolation("find_collisions: duplicate b values");
    }
    SearchStats local;
    SearchStats& st = stats != nullptr ? *stats : local;
    std::vector<BigInt> b;
    for (const auto& e : elements) b.push_back(e.b);
    std::vector<SumCollision> found = detail::stratified_pairs(elements, cfg.d(), opts, st);
    for (int l = 3; l <= h; ++l) detail::brute_force_level(b, l, opts, st, found);
    std::sort(found.begin(), found.end(),
              [&](const SumCollision& x, const SumCollision& y) { return detail::sum_less(x, y, b); });
    std::vector<CollisionRecord> out;
    out.reserve(found.size());
    for (const auto& c : found) out.push_back(make_record(c, elements));
    return out;
}

/// Bad_{alpha,K}: for each shell, the elements that are the largest member
/// of some repeated sum over the union of all given shells.
inline std::map<int, std::vector<EncodedElement>> bad_elements(const Shells& shells, int h,
                                                               const SearchOptions& opts = {},
                                                               SearchStats* stats = nullptr) {
    std::map<int, std::vector<EncodedElement>> bad;
    for (const auto& [K, v] : shells) bad[K];
    std::set<BigInt> taken;
    for (const auto& r : find_collisions(flatten(shells), h, opts, stats)) {
        const EncodedElement& top = r.largest();
        if (taken.insert(top.b).second) bad[top.K].push_back(top);
    }
    for (auto& [K, v] : bad)
        std::sort(v.begin(), v.end(), [](const EncodedElement& x, const EncodedElement& y) { return x.b < y.b; });
    return bad;
}

/// Union of the shells minus the Bad sets, ascending by b.
inline std::vector<EncodedElement> clean_sequence(const Shells& shells, int h, const SearchOptions& opts = {},
                                                  SearchStats* stats = nullptr) {
    std::set<BigInt> drop;
    for (const auto& [K, v] : bad_elements(shells, h, opts, stats))
        for (const auto& e : v) drop.insert(e.b);
    std::vector<EncodedElement> out;
    for (const auto& e : flatten(shells))
        if (!drop.count(e.b)) out.push_back(e);
    std::sort(out.begin(), out.end(), [](const EncodedElement& x, const EncodedElement& y) { return x.b < y.b; });
    return out;
}

/// #{b in sequence : b <= x}; sequence sorted ascending.
inline std::size_t counting_function(const std::vector<BigInt>& sequence, const BigInt& x) {
    return static_cast<std::size_t>(std::upper_bound(sequence.begin(), sequence.end(), x) - sequence.begin());
}

struct ExponentEstimate {
    double slope = 0;
    double target = 0;  // 1/c_h
    std::vector<std::pair<double, double>> points;  // (log2 x, log2 B(x))
};

inline double log2_of(const BigInt& x) {
    const std::int64_t drop = std::max<std::int64_t>(0, bit_length(x) - 60);
    const auto top = static_cast<std::uint64_t>(x >> static_cast<unsigned>(drop));
    return std::log2(static_cast<double>(top)) + static_cast<double>(drop);
}

/// Least-squares slope of log2 B(x) against log2 x over the sample points
/// with B(x) > 0.
inline ExponentEstimate loglog_slope(const std::vector<BigInt>& sequence, const std::vector<BigInt>& xs) {
    ExponentEstimate est;
    for (const BigInt& x : xs) {
        const std::size_t n = counting_function(sequence, x);
        if (n == 0 || x <= 0) continue;
        est.points.emplace_back(log2_of(x), std::log2(static_cast<double>(n)));
    }
    if (est.points.size() < 2) throw InsufficientData("need at least two sample points with B(x) > 0");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : est.points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(est.points.size());
    const double den = n * sxx - sx * sx;
    if (den <= 0) throw InsufficientData("sample points do not span a range of x");
    est.slope = (n * sxy - sx * sy) / den;
    return est;
}

/// Shell whose marker is the top bit of b, or -1.
inline int shell_of(const BigInt& b, int h) {
    const int d = make_config(h).d();
    const std::int64_t top = bit_length(b) - 1;
    for (int K = h + 1; K <= kMaxShell; ++K)
        if (marker_position(K, d) == top) return K;
    return -1;
}

/// Counting exponent sampled at x_K = 2^(K^2 + (2d+1)K + (d+1) + 1), one
/// point per shell spanned by the sequence.
inline ExponentEstimate exponent_estimate(const std::vector<BigInt>& sequence, int h) {
    const ShellConfig cfg = make_config(h);
    if (sequence.empty()) throw InsufficientData("empty sequence");
    if (!std::is_sorted(sequence.begin(), sequence.end()))
        throw PreconditionViolation("exponent_estimate: sequence must be sorted");
    const int k_lo = shell_of(sequence.front(), h);
    const int k_hi = shell_of(sequence.back(), h);
    if (k_lo < 0 || k_hi < 0) throw MalformedEncoding("sequence element is not an encoded value");
    if (k_hi - k_lo + 1 < 4) throw InsufficientData("sequence spans fewer than 4 shells");
    std::vector<BigInt> xs;
    for (int K = k_lo; K <= k_hi; ++K) xs.push_back(pow2(marker_position(K, cfg.d()) + 1));
    ExponentEstimate est = loglog_slope(sequence, xs);
    if (est.points.size() < 4) throw InsufficientData("fewer than 4 shells with elements");
    est.target = 1.0 / cfg.c_approx();
    return est;
}

}  // namespace bhforge
