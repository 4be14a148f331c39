#pragma once

#include "bhforge/bigint.hpp"
#include "bhforge/errors.hpp"

#include <boost/integer/common_factor_rt.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace bhforge {

/// Reduced fraction with positive denominator. Used for the dilation factor
/// alpha, which must lie in [1, 2] wherever the construction consumes it.
class ExactRational {
public:
    ExactRational() = default;
    ExactRational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
        if (den == 0) throw PreconditionViolation("ExactRational: zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = boost::integer::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    /// Parses "p/q" or "p".
    static ExactRational parse(std::string_view s) {
        const auto slash = s.find('/');
        try {
            if (slash == std::string_view::npos) return ExactRational(std::stoll(std::string(s)));
            return ExactRational(std::stoll(std::string(s.substr(0, slash))),
                                 std::stoll(std::string(s.substr(slash + 1))));
        } catch (const std::logic_error&) {
            throw PreconditionViolation("cannot parse rational '" + std::string(s) + "'");
        }
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool in_unit_alpha_range() const { return num_ >= den_ && num_ <= 2 * den_; }

    std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend bool operator==(const ExactRational&, const ExactRational&) = default;
    friend bool operator<(const ExactRational& a, const ExactRational& b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }

private:
    std::int64_t num_ = 1;
    std::int64_t den_ = 1;
};

inline void require_alpha(const ExactRational& alpha) {
    if (!alpha.in_unit_alpha_range())
        throw PreconditionViolation("alpha " + alpha.str() + " outside [1, 2]");
}

}  // namespace bhforge
