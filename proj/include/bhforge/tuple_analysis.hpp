#pragma once

// Predicates on tuples of Gaussian primes (argument separation, the partial
// sums omega_s of a bad tuple and the conditions they satisfy) and the
// alpha-scan over a dyadic grid.

#include "bhforge/bigint.hpp"
#include "bhforge/collisions.hpp"
#include "bhforge/dyadic.hpp"
#include "bhforge/encoding.hpp"
#include "bhforge/errors.hpp"
#include "bhforge/gaussian.hpp"
#include "bhforge/parallel.hpp"
#include "bhforge/rational.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace bhforge {

enum class Certainty { False, True, Undecided };

inline const char* to_string(Certainty c) {
    switch (c) {
        case Certainty::True: return "true";
        case Certainty::False: return "false";
        default: return "undecided";
    }
}

namespace detail {

/// x <= y decided on enclosures; nullopt when they overlap.
inline std::optional<bool> decide_le(const DyadicInterval& x, const DyadicInterval& y) {
    if (compare_scaled(x.hi, x.exponent, y.lo, y.exponent) <= 0) return true;
    if (compare_scaled(x.lo, x.exponent, y.hi, y.exponent) > 0) return false;
    return std::nullopt;
}

inline Certainty as_certainty(std::optional<bool> v) {
    if (!v) return Certainty::Undecided;
    return *v ? Certainty::True : Certainty::False;
}

inline void require_distinct(const std::vector<GaussianPrime>& primes) {
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    for (const auto& p : primes) {
        if (!(p.a > p.b && p.b > 0)) throw PreconditionViolation("prime not in the first octant");
        if (!seen.insert({p.a, p.b}).second) throw PreconditionViolation("tuple primes are not distinct");
    }
}

}  // namespace detail

struct OmegaProfile {
    std::vector<GaussianPrime> left;
    std::vector<GaussianPrime> right;
    std::vector<DyadicInterval> omegas;  // omega_1 .. omega_l
    std::int64_t precision_bits = 0;
};

/// omega_s = sum_{r <= s} (theta(left_r) - theta(right_r)), each theta known
/// to 2^-precision_bits.
inline OmegaProfile omega_profile(const std::vector<GaussianPrime>& left, const std::vector<GaussianPrime>& right,
                                  std::int64_t precision_bits, const PrecisionPolicy& policy = {}) {
    if (left.size() != right.size() || left.empty()) throw PreconditionViolation("omega_profile: sides differ in size");
    OmegaProfile prof{left, right, {}, precision_bits};
    DyadicInterval acc = DyadicInterval::exact(0, -precision_bits);
    for (std::size_t r = 0; r < left.size(); ++r) {
        acc = acc + theta_interval(left[r], precision_bits, policy) - theta_interval(right[r], precision_bits, policy);
        prof.omegas.push_back(acc);
    }
    return prof;
}

struct SeparationResult {
    Certainty status = Certainty::Undecided;
    double margin = 0;   // lower end of the gap minus upper end of the bound
    DyadicInterval gap;  // |sum theta(left) - sum theta(right)|
    DyadicInterval bound;  // 1 / (7 sqrt(prod of norms))
    std::int64_t precision_bits = 0;
};

/// |sum theta(p_r) - sum theta(p'_r)| > 1 / (7 |p_1 ... p'_l|) for distinct
/// first-octant primes; the first half of `tuple` is one side.
inline SeparationResult check_separation(const std::vector<GaussianPrime>& tuple, const PrecisionPolicy& policy = {}) {
    if (tuple.empty() || tuple.size() % 2 != 0) throw PreconditionViolation("check_separation: need 2l primes");
    detail::require_distinct(tuple);
    const std::size_t l = tuple.size() / 2;
    BigInt prod = 1;
    for (const auto& p : tuple) prod *= p.norm;
    const std::int64_t scale = bit_length(prod) / 2 + 8;
    std::int64_t w = std::max<std::int64_t>(policy.initial_bits, scale + 64);
    SeparationResult res;
    for (;;) {
        if (w > policy.cap_bits) return res;
        DyadicInterval sum = DyadicInterval::exact(0, -w);
        for (std::size_t r = 0; r < l; ++r)
            sum = sum + theta_interval(tuple[r], w, policy) - theta_interval(tuple[l + r], w, policy);
        res.gap = abs(sum);
        const DyadicInterval root = sqrt_interval(prod, w);
        res.bound = divide_positive(DyadicInterval::exact(1), DyadicInterval::exact(7) * root, -(w + scale));
        res.precision_bits = w;
        res.margin = res.gap.lo_double() - res.bound.hi_double();
        // gap > bound is the claim; gap <= bound refutes it.
        auto le = detail::decide_le(res.gap, res.bound);
        if (le) {
            res.status = *le ? Certainty::False : Certainty::True;
            return res;
        }
        if (w >= policy.cap_bits) return res;
        w = policy.escalate(w);
    }
}

/// n distinct primes drawn uniformly from the pool.
inline std::vector<GaussianPrime> random_tuple(const std::vector<GaussianPrime>& pool, std::size_t n,
                                               std::mt19937_64& rng) {
    if (pool.size() < n) throw PreconditionViolation("random_tuple: pool smaller than tuple");
    std::vector<GaussianPrime> out;
    std::set<std::size_t> used;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    while (out.size() < n) {
        const std::size_t i = pick(rng);
        if (used.insert(i).second) out.push_back(pool[i]);
    }
    return out;
}

struct SeparationSummary {
    std::size_t samples = 0;
    std::size_t certified_true = 0;
    std::size_t certified_false = 0;
    std::size_t undecided = 0;
    double min_margin = 0;
};

/// check_separation on `samples` seeded random 2h-tuples of distinct primes
/// with norm <= max_norm. Tuples are drawn up front, so results do not
/// depend on the thread count.
inline SeparationSummary separation_suite(int h, std::size_t samples, std::uint64_t max_norm, std::uint64_t seed,
                                          const PrecisionPolicy& policy = {}, int threads = 1) {
    if (h < 1 || h > 4) throw PreconditionViolation("separation_suite: h must be 1..4");
    const auto pool = sieve_gaussian_primes(max_norm);
    std::mt19937_64 rng(seed);
    std::vector<std::vector<GaussianPrime>> tuples;
    for (std::size_t i = 0; i < samples; ++i) tuples.push_back(random_tuple(pool, 2 * static_cast<std::size_t>(h), rng));
    std::vector<SeparationResult> res(samples);
    parallel_for(samples, threads, [&](std::size_t i) { res[i] = check_separation(tuples[i], policy); });
    SeparationSummary sum;
    sum.samples = samples;
    bool first = true;
    for (const auto& r : res) {
        if (r.status == Certainty::True) ++sum.certified_true;
        else if (r.status == Certainty::False) ++sum.certified_false;
        else ++sum.undecided;
        if (first || r.margin < sum.min_margin) sum.min_margin = r.margin;
        first = false;
    }
    return sum;
}

struct CertificateChecks {
    Certainty shell_matching = Certainty::Undecided;       // p_r, p'_r in the same shell K_r
    Certainty truncation_equality = Certainty::Undecided;  // equal sums of the K_r^2-digit truncations
    Certainty omega_small = Certainty::Undecided;          // |omega_l| <= l 2^-(K_l^2)
    Certainty omega_gap = Certainty::Undecided;            // |omega_(l-1)| >= 2^(-(K_l-1)^2/c - 4)
    Certainty shell_inequality = Certainty::Undecided;     // (c-1)(K_l-1)^2 <= sum_{r<l} (K_r-1)^2
    std::vector<Certainty> near_integer;                   // s = 1..l-1

    std::vector<Certainty> all() const {
        std::vector<Certainty> v{shell_matching, truncation_equality, omega_small, omega_gap, shell_inequality};
        v.insert(v.end(), near_integer.begin(), near_integer.end());
        return v;
    }
};

struct BadTupleCertificate {
    CollisionRecord record;
    OmegaProfile profile;
    CertificateChecks checks;

    bool valid() const {
        for (auto c : checks.all())
            if (c != Certainty::True) return false;
        return true;
    }
    bool undecided() const {
        for (auto c : checks.all())
            if (c == Certainty::Undecided) return true;
        return false;
    }
};

/// Verifies the structure a genuine bad tuple must have: shell matching and
/// equal truncations, the three omega conditions and the nearest-integer
/// condition for s = 1..l-1.
inline BadTupleCertificate certify(const CollisionRecord& record, const ShellConfig& cfg) {
    const int l = record.l;
    if (l < 2 || static_cast<int>(record.left.size()) != l || static_cast<int>(record.right.size()) != l)
        throw PreconditionViolation("certify: malformed record");
    BadTupleCertificate cert;
    cert.record = record;
    CertificateChecks& ck = cert.checks;

    bool match = true;
    for (int r = 0; r < l; ++r) match = match && record.left[static_cast<std::size_t>(r)].K == record.right[static_cast<std::size_t>(r)].K;
    ck.shell_matching = match ? Certainty::True : Certainty::False;

    // Truncations as integers over 2^(K_max^2).
    int k_top = 0;
    for (const auto& e : record.left) k_top = std::max(k_top, e.K);
    for (const auto& e : record.right) k_top = std::max(k_top, e.K);
    auto side_sum = [&](const std::vector<EncodedElement>& side) {
        BigInt s = 0;
        for (const auto& e : side)
            s += truncation_from_blocks(e.block_vector) << static_cast<unsigned>(k_top * k_top - e.K * e.K);
        return s;
    };
    ck.truncation_equality = side_sum(record.left) == side_sum(record.right) ? Certainty::True : Certainty::False;

    std::vector<int> K;
    for (const auto& e : record.left) K.push_back(e.K);
    std::vector<GaussianPrime> left, right;
    for (const auto& e : record.left) left.push_back(e.prime);
    for (const auto& e : record.right) right.push_back(e.prime);
    const int kl = K.back();

    std::int64_t sq = 0;
    for (int r = 0; r + 1 < l; ++r) sq += static_cast<std::int64_t>(K[static_cast<std::size_t>(r)] - 1) * (K[static_cast<std::size_t>(r)] - 1);
    const std::int64_t kl1 = static_cast<std::int64_t>(kl - 1) * (kl - 1);

    ck.near_integer.assign(static_cast<std::size_t>(l - 1), Certainty::Undecided);
    std::int64_t w = std::max<std::int64_t>(cfg.precision.initial_bits, static_cast<std::int64_t>(k_top) * k_top + 64);
    for (;;) {
        cert.profile = omega_profile(left, right, w, cfg.precision);
        const auto& om = cert.profile.omegas;
        const DyadicInterval c = cfg.c_enclosure(w);

        ck.omega_small = detail::as_certainty(
            detail::decide_le(abs(om.back()), DyadicInterval::exact(BigInt(l), -static_cast<std::int64_t>(kl) * kl)));

        const DyadicInterval q = -divide_positive(DyadicInterval::exact(BigInt(kl1)), c, -w) - DyadicInterval::exact(4);
        const DyadicInterval threshold = exp2_interval(q, w);
        ck.omega_gap = detail::as_certainty(detail::decide_le(threshold, abs(om[static_cast<std::size_t>(l - 2)])));

        const DyadicInterval lhs = (c - DyadicInterval::exact(1)) * DyadicInterval::exact(BigInt(kl1));
        ck.shell_inequality = detail::as_certainty(detail::decide_le(lhs, DyadicInterval::exact(BigInt(sq))));

        for (int s = 1; s < l; ++s) {
            const auto ks = static_cast<std::int64_t>(K[static_cast<std::size_t>(s - 1)]);
            const auto ks1 = static_cast<std::int64_t>(K[static_cast<std::size_t>(s)]);
            DyadicInterval y = scale_rational(om[static_cast<std::size_t>(s - 1)], cfg.alpha.num(), cfg.alpha.den(), -w - 4);
            y.exponent += ks1 * ks1;
            const auto dist = distance_to_nearest_integer(y);
            auto& slot = ck.near_integer[static_cast<std::size_t>(s - 1)];
            if (!dist) slot = Certainty::Undecided;
            else slot = detail::as_certainty(detail::decide_le(*dist, DyadicInterval::exact(BigInt(s), ks1 * ks1 - ks * ks)));
        }

        if (!cert.undecided() || w >= cfg.precision.cap_bits) break;
        w = std::min(2 * w, cfg.precision.cap_bits);
    }
    return cert;
}

// ---------------------------------------------------------------- alpha scan

struct ScanOptions {
    int k_min = 3;
    int k_max = 8;
    int step_log2 = 8;  // grid step 2^-step_log2 over [1, 2]
    bool certify = true;
    int threads = 1;
    SearchOptions search{};
    PrecisionPolicy precision{};
    std::uint64_t sieve_cap = kDefaultSieveCap;
};

struct ScanRow {
    ExactRational alpha;
    int K = 0;
    int l = 0;
    std::uint64_t count = 0;      // |E_2l(alpha; K)|, canonical records with top shell K
    std::uint64_t undecided = 0;  // records whose certificate stayed undecided
    bool budget_flag = false;
};

/// log2 of the reference shapes K^m 2^(e (K-1)^2 - 2K) for the two printed
/// exponents e = 2(l-1)/c - 1 and e = 2(l-1)/(c-1) - 1.
struct ReferenceCurve {
    int K = 0;
    int l = 0;
    double log2_shape_c = 0;        // exponent with 2(l-1)/c
    double log2_shape_c_minus_1 = 0;  // exponent with 2(l-1)/(c-1)
    std::vector<int> k_powers;      // labelled alternatives for m
};

struct ScanReport {
    int h = 2;
    ScanOptions options;
    std::vector<ScanRow> rows;
    std::map<int, std::size_t> shell_sizes;
    std::map<std::pair<int, int>, double> integral;  // (K, l) -> trapezoid estimate over [1, 2]
    std::map<std::pair<int, int>, double> mean_ratio;  // (K, l) -> mean count / max(1, |B_K|)
    std::vector<ReferenceCurve> references;
    std::uint64_t records = 0;
    std::uint64_t certified = 0;
    std::uint64_t failed = 0;
    std::uint64_t undecided = 0;
    std::vector<BadTupleCertificate> failures;  // certificates with a false check
};

inline std::vector<ExactRational> alpha_grid(int step_log2) {
    if (step_log2 < 0 || step_log2 > 12) throw PreconditionViolation("grid step must be 2^-j with 0 <= j <= 12");
    const std::int64_t n = std::int64_t{1} << step_log2;
    std::vector<ExactRational> g;
    for (std::int64_t i = 0; i <= n; ++i) g.emplace_back(n + i, n);
    return g;
}

inline std::vector<ReferenceCurve> reference_curves(int h, int k_min, int k_max) {
    const double c = make_config(h).c_approx();
    std::vector<ReferenceCurve> out;
    for (int K = k_min; K <= k_max; ++K)
        for (int l = 2; l <= h; ++l) {
            const double sq = static_cast<double>((K - 1) * (K - 1));
            out.push_back({K, l, (2.0 * (l - 1) / c - 1) * sq - 2.0 * K, (2.0 * (l - 1) / (c - 1) - 1) * sq - 2.0 * K,
                           l == 2 ? std::vector<int>{1, 4, 5} : std::vector<int>{2, 4, 5}});
        }
    return out;
}

/// For every grid alpha: encode shells k_min..k_max, find all repeated sums,
/// tally them by top shell and l, and optionally certify each record.
inline ScanReport alpha_scan(int h, const ScanOptions& opts) {
    const ShellConfig base = make_config(h);
    if (opts.k_max < opts.k_min) throw PreconditionViolation("alpha_scan: k_max < k_min");
    ScanReport rep;
    rep.h = h;
    rep.options = opts;
    const auto grid = alpha_grid(opts.step_log2);
    const int k_first = std::max(opts.k_min, h + 1);

    const SequenceBuilder builder(h, k_first, opts.k_max, opts.precision, opts.sieve_cap);
    for (int K = opts.k_min; K <= opts.k_max; ++K) rep.shell_sizes[K] = K < k_first ? 0 : builder.shell_size(K);

    struct Slot {
        std::vector<ScanRow> rows;
        std::uint64_t records = 0, certified = 0, failed = 0, undecided = 0;
        std::vector<BadTupleCertificate> failures;
    };
    std::vector<Slot> slots(grid.size());
    parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
        Slot& slot = slots[i];
        const ExactRational& alpha = grid[i];
        std::map<std::pair<int, int>, ScanRow> rows;
        for (int K = opts.k_min; K <= opts.k_max; ++K)
            for (int l = 2; l <= h; ++l) rows[{K, l}] = ScanRow{alpha, K, l, 0, 0, false};
        try {
            const auto elements = flatten(builder.encode(alpha));
            ShellConfig cfg = base;
            cfg.alpha = alpha;
            cfg.precision = opts.precision;
            for (const auto& rec : find_collisions(elements, h, opts.search)) {
                ScanRow& row = rows[{rec.top_shell(), rec.l}];
                ++row.count;
                ++slot.records;
                if (!opts.certify) continue;
                BadTupleCertificate cert = certify(rec, cfg);
                if (cert.valid()) ++slot.certified;
                else if (cert.undecided()) {
                    ++slot.undecided;
                    ++row.undecided;
                } else {
                    ++slot.failed;
                    slot.failures.push_back(std::move(cert));
                }
            }
        } catch (const SearchBudgetExceeded&) {
            for (auto& [key, row] : rows) {
                row.count = 0;
                row.budget_flag = true;
            }
        }
        for (auto& [key, row] : rows) slot.rows.push_back(row);
    });

    const double step = std::ldexp(1.0, -opts.step_log2);
    std::map<std::pair<int, int>, std::vector<double>> series;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        auto& s = slots[i];
        rep.records += s.records;
        rep.certified += s.certified;
        rep.failed += s.failed;
        rep.undecided += s.undecided;
        for (auto& f : s.failures) rep.failures.push_back(std::move(f));
        for (const auto& row : s.rows) {
            rep.rows.push_back(row);
            if (!row.budget_flag) series[{row.K, row.l}].push_back(static_cast<double>(row.count));
        }
    }
    for (const auto& [key, v] : series) {
        if (v.empty()) continue;
        double sum = 0;
        for (double x : v) sum += x;
        // Trapezoid rule; exact grid coverage only when no alpha was flagged.
        rep.integral[key] = v.size() >= 2 ? step * (sum - 0.5 * (v.front() + v.back())) : 0.0;
        const double size = std::max<double>(1.0, static_cast<double>(rep.shell_sizes[key.first]));
        rep.mean_ratio[key] = sum / static_cast<double>(v.size()) / size;
    }
    rep.references = reference_curves(h, opts.k_min, opts.k_max);
    return rep;
}

/// Rows for a single K (shells h+1..K are built).
inline std::vector<ScanRow> alpha_scan(int h, int K, int step_log2, const ScanOptions& base = {}) {
    ScanOptions opts = base;
    opts.k_min = K;
    opts.k_max = K;
    opts.step_log2 = step_log2;
    if (K < h + 1) {
        std::vector<ScanRow> rows;
        for (const auto& a : alpha_grid(step_log2))
            for (int l = 2; l <= h; ++l) rows.push_back({a, K, l, 0, 0, false});
        return rows;
    }
    opts.k_min = h + 1;
    std::vector<ScanRow> out;
    for (const auto& row : alpha_scan(h, opts).rows)
        if (row.K == K) out.push_back(row);
    return out;
}

// ------------------------------------------------------- lattice reductions

struct GaussianInt {
    BigInt re = 0;
    BigInt im = 0;

    friend bool operator==(const GaussianInt&, const GaussianInt&) = default;
    friend GaussianInt operator*(const GaussianInt& x, const GaussianInt& y) {
        return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
    }
};

struct Factor {
    GaussianPrime prime;
    bool conjugate = false;
};

struct VisibleReduction {
    GaussianInt product;
    GaussianInt visible;  // product / gcd(re, im)
    BigInt content;
};

/// Product of the factors (conjugated where flagged) and its primitive
/// representative, which has the same argument.
inline VisibleReduction visible_reduction(const std::vector<Factor>& factors) {
    if (factors.empty()) throw PreconditionViolation("visible_reduction: empty factor list");
    GaussianInt z{1, 0};
    for (const auto& f : factors) {
        const BigInt a(f.prime.a);
        const BigInt b(f.prime.b);
        z = z * GaussianInt{a, f.conjugate ? BigInt(-b) : b};
    }
    BigInt g = boost::multiprecision::gcd(boost::multiprecision::abs(z.re), boost::multiprecision::abs(z.im));
    return {z, {z.re / g, z.im / g}, g};
}

/// theta of a nonzero Gaussian integer, in turns within [0, 1).
inline DyadicInterval theta_of(const GaussianInt& z, std::int64_t w) { return turns_interval(z.re, z.im, w); }

}  // namespace bhforge
