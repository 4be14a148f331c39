#pragma once

// Visible lattice points and sector counts.

#include "bhforge/bigint.hpp"
#include "bhforge/dyadic.hpp"
#include "bhforge/errors.hpp"
#include "bhforge/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace bhforge {

inline constexpr std::int64_t kMaxVisibleRadius = 10'000;

struct LatticePoint {
    std::int64_t x = 0;
    std::int64_t y = 0;

    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

inline std::int64_t cross(const LatticePoint& u, const LatticePoint& w) { return u.x * w.y - u.y * w.x; }
inline std::int64_t dot(const LatticePoint& u, const LatticePoint& w) { return u.x * w.x + u.y * w.y; }

/// Strict "argument of p < argument of q", arguments taken in [0, 2 pi).
inline bool argument_less(const LatticePoint& p, const LatticePoint& q) {
    auto upper = [](const LatticePoint& z) { return z.y > 0 || (z.y == 0 && z.x > 0); };
    const bool up = upper(p), uq = upper(q);
    if (up != uq) return up;
    return cross(p, q) > 0;
}

/// Points (x, y) with gcd(|x|, |y|) = 1 and 0 < x^2 + y^2 < R^2, except
/// (1, 0), ordered by argument.
inline std::vector<LatticePoint> visible_points(const ExactRational& radius) {
    if (radius.num() <= 0) throw PreconditionViolation("visible_points: radius must be positive");
    if (radius.num() > kMaxVisibleRadius * radius.den())
        throw RadiusTooLarge("radius " + radius.str() + " exceeds " + std::to_string(kMaxVisibleRadius));
    const std::int64_t r = radius.num() / radius.den();
    const __int128 num2 = static_cast<__int128>(radius.num()) * radius.num();
    const __int128 den2 = static_cast<__int128>(radius.den()) * radius.den();
    std::vector<LatticePoint> out;
    for (std::int64_t x = -r; x <= r; ++x) {
        for (std::int64_t y = -r; y <= r; ++y) {
            if (static_cast<__int128>(x * x + y * y) * den2 >= num2) continue;
            if (std::gcd(x < 0 ? -x : x, y < 0 ? -y : y) != 1) continue;
            if (x == 1 && y == 0) continue;
            out.push_back({x, y});
        }
    }
    std::sort(out.begin(), out.end(), argument_less);
    return out;
}

/// Closed cone swept counter-clockwise from direction u to direction v,
/// with an opening angle strictly between 0 and pi.
struct RadianSector {
    LatticePoint u;
    LatticePoint v;

    void validate() const {
        if (cross(u, v) <= 0) throw PreconditionViolation("sector must open counter-clockwise by less than pi");
    }
    bool contains(const LatticePoint& w) const { return cross(u, w) >= 0 && cross(w, v) >= 0; }
};

/// Opening angle of the sector in radians.
inline DyadicInterval sector_angle(const RadianSector& s, std::int64_t w) {
    s.validate();
    DyadicInterval turns = turns_interval(BigInt(dot(s.u, s.v)), BigInt(cross(s.u, s.v)), w + 8);
    DyadicInterval two_pi = pi_interval(w + 8);
    two_pi.exponent += 1;
    return (turns * two_pi).rescaled(-w);
}

inline std::size_t count_in_radian_sector(const std::vector<LatticePoint>& points, const RadianSector& s) {
    s.validate();
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [&](const auto& p) { return s.contains(p); }));
}

struct RadianBoundCheck {
    std::size_t count = 0;
    DyadicInterval angle;        // phi
    DyadicInterval bound;        // phi R^2 + 1
    std::optional<bool> holds;   // count <= phi R^2 + 1, nullopt if undecided at the cap
};

/// count <= phi R^2 + 1 for the visible points strictly inside radius R.
inline RadianBoundCheck check_radian_bound(const std::vector<LatticePoint>& points, const ExactRational& radius,
                                           const RadianSector& s, const PrecisionPolicy& policy = {}) {
    RadianBoundCheck res;
    res.count = count_in_radian_sector(points, s);
    const BigInt n2 = BigInt(radius.num()) * radius.num();
    const BigInt d2 = BigInt(radius.den()) * radius.den();
    for (std::int64_t w = std::max<std::int64_t>(policy.initial_bits, 64);; w = policy.escalate(w)) {
        res.angle = sector_angle(s, w);
        res.bound = scale_rational(res.angle, n2, d2, -w) + DyadicInterval::exact(1);
        const DyadicInterval c = DyadicInterval::exact(BigInt(res.count));
        if (compare_scaled(c.hi, 0, res.bound.lo, res.bound.exponent) <= 0) res.holds = true;
        else if (compare_scaled(c.lo, 0, res.bound.hi, res.bound.exponent) > 0) res.holds = false;
        if (res.holds || w >= policy.cap_bits) return res;
    }
}

/// Sector between two random integer directions with coordinates in
/// [-coord_max, coord_max], oriented so that it opens counter-clockwise.
inline RadianSector random_sector(std::mt19937_64& rng, std::int64_t coord_max = 1000) {
    std::uniform_int_distribution<std::int64_t> coord(-coord_max, coord_max);
    for (;;) {
        RadianSector s{{coord(rng), coord(rng)}, {coord(rng), coord(rng)}};
        const std::int64_t c = cross(s.u, s.v);
        if (c == 0) continue;
        if (c < 0) std::swap(s.u, s.v);
        return s;
    }
}

struct SectorSuiteResult {
    std::size_t cases = 0;
    std::size_t holds = 0;
    std::size_t violated = 0;
    std::size_t undecided = 0;
    double max_fill = 0;  // max of (count - 1) / (phi R^2)
};

/// check_radian_bound over `samples` seeded random sectors at radius R.
inline SectorSuiteResult sector_bound_suite(const ExactRational& radius, std::size_t samples, std::uint64_t seed,
                                            const PrecisionPolicy& policy = {}) {
    const auto points = visible_points(radius);
    std::mt19937_64 rng(seed);
    SectorSuiteResult out;
    const double r2 = radius.to_double() * radius.to_double();
    for (std::size_t i = 0; i < samples; ++i) {
        const RadianSector s = random_sector(rng);
        const RadianBoundCheck c = check_radian_bound(points, radius, s, policy);
        ++out.cases;
        if (!c.holds) ++out.undecided;
        else if (*c.holds) ++out.holds;
        else ++out.violated;
        const double phi = c.angle.mid_double();
        if (phi > 0) out.max_fill = std::max(out.max_fill, (static_cast<double>(c.count) - 1) / (phi * r2));
    }
    return out;
}

/// Points nu with |nu| < R and || theta(nu) + t || < eps, theta in turns.
struct SectorQuery {
    ExactRational radius{1};
    ExactRational t{0};
    ExactRational eps{1, 8};

    void validate() const {
        if (radius < ExactRational(1)) throw PreconditionViolation("sector radius must be at least 1");
        if (t < ExactRational(0) || !(t < ExactRational(1))) throw PreconditionViolation("offset t must lie in [0, 1)");
        if (!(ExactRational(0) < eps) || ExactRational(1, 2) < eps)
            throw PreconditionViolation("eps must lie in (0, 1/2]");
    }
};

struct SectorCount {
    std::size_t count = 0;
    std::size_t undecided = 0;
    double bound_turns_form = 0;   // eps R^2 + 1
    double bound_radian_form = 0;  // 4 pi eps R^2 + 1 (the sector is 4 pi eps radians wide)
};

namespace detail {

/// || theta + t || < eps for a point direction; nullopt if undecided at the cap.
inline std::optional<bool> in_turns_sector(const LatticePoint& p, const SectorQuery& q, const PrecisionPolicy& policy) {
    const BigInt tn(q.t.num()), td(q.t.den()), en(q.eps.num()), ed(q.eps.den());
    DyadicInterval theta = turns_interval(BigInt(p.x), BigInt(p.y), 64);
    if (theta.is_exact()) {
        // theta = m 2^e with e >= -3; scale everything by L = 8 td ed.
        const BigInt L = 8 * td * ed;
        const BigInt N = floor_shift(theta.lo, theta.exponent + 3) * td * ed + 8 * tn * ed;
        BigInt r = N % L;
        if (r < 0) r += L;
        const BigInt dist = std::min(r, BigInt(L - r));  // times L
        return dist * ed < en * L;
    }
    for (std::int64_t w = std::max<std::int64_t>(policy.initial_bits, 64);; w = policy.escalate(w)) {
        theta = turns_interval(BigInt(p.x), BigInt(p.y), w);
        const DyadicInterval t = scale_rational(DyadicInterval::exact(tn), 1, td, -w - 8);
        if (auto dist = distance_to_nearest_integer(theta + t)) {
            const DyadicInterval lhs = scale_rational(*dist, ed, 1, dist->exponent);
            if (compare_scaled(lhs.hi, lhs.exponent, en, 0) < 0) return true;
            if (compare_scaled(lhs.lo, lhs.exponent, en, 0) >= 0) return false;
        }
        if (w >= policy.cap_bits) return std::nullopt;
    }
}

}  // namespace detail

inline SectorCount count_in_sector(const SectorQuery& q, const PrecisionPolicy& policy = {}) {
    q.validate();
    SectorCount out;
    for (const auto& p : visible_points(q.radius)) {
        const auto in = detail::in_turns_sector(p, q, policy);
        if (!in) ++out.undecided;
        else if (*in) ++out.count;
    }
    const double r = q.radius.to_double();
    out.bound_turns_form = q.eps.to_double() * r * r + 1;
    out.bound_radian_form = 4 * 3.14159265358979323846 * q.eps.to_double() * r * r + 1;
    return out;
}

}  // namespace bhforge
