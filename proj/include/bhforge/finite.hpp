#pragma once

// Finite B_h sets { floor(x theta(p)) : norm(p)^h <= x / (7h) }.

#include "bhforge/bigint.hpp"
#include "bhforge/errors.hpp"
#include "bhforge/gaussian.hpp"
#include "bhforge/parallel.hpp"
#include "bhforge/rational.hpp"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

namespace bhforge {

struct FiniteBhSet {
    int h = 2;
    std::uint64_t x = 0;
    std::vector<std::uint64_t> elements;  // sorted, distinct
    std::vector<GaussianPrime> source_primes;
};

/// Largest N with 7h N^h <= x.
inline std::uint64_t finite_norm_radius(std::uint64_t x, int h) {
    if (h < 2 || h > 4) throw PreconditionViolation("h must be 2, 3 or 4");
    const BigInt limit(x);
    std::uint64_t lo = 0, hi = 1;
    auto ok = [&](std::uint64_t n) { return 7 * h * boost::multiprecision::pow(BigInt(n), static_cast<unsigned>(h)) <= limit; };
    while (ok(hi)) hi *= 2;
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

inline FiniteBhSet build_finite_bh(std::uint64_t x, int h, const PrecisionPolicy& policy = {}, int threads = 1) {
    if (x == 0) throw PreconditionViolation("x must be positive");
    if (x > (std::uint64_t{1} << 62)) throw PreconditionViolation("x too large");
    FiniteBhSet s;
    s.h = h;
    s.x = x;
    s.source_primes = sieve_gaussian_primes(finite_norm_radius(x, h));
    std::vector<std::uint64_t> floors(s.source_primes.size());
    const ExactRational scale(static_cast<std::int64_t>(x));
    parallel_for(floors.size(), threads, [&](std::size_t i) {
        floors[i] = static_cast<std::uint64_t>(alpha_theta_truncation(s.source_primes[i], scale, 0, policy));
    });
    std::set<std::uint64_t> uniq(floors.begin(), floors.end());
    s.elements.assign(uniq.begin(), uniq.end());
    return s;
}

struct DensityReport {
    std::size_t count = 0;
    std::uint64_t x = 0;
    double ratio = 0;  // count x^(-1/h) ln x
};

inline DensityReport density_report(const FiniteBhSet& s) {
    DensityReport r{s.elements.size(), s.x, 0.0};
    if (r.count > 0) {
        const double x = static_cast<double>(s.x);
        r.ratio = static_cast<double>(r.count) * std::pow(x, -1.0 / s.h) * std::log(x);
    }
    return r;
}

}  // namespace bhforge
