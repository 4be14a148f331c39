#pragma once

#include <stdexcept>
#include <string>

namespace bhforge {

/// Input violates an operation's precondition (bad h, K below h+1, ...).
class PreconditionViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Certified evaluation would need more bits than the configured cap.
class PrecisionCapExceeded : public std::runtime_error {
public:
    explicit PrecisionCapExceeded(long long cap_bits)
        : std::runtime_error("precision cap of " + std::to_string(cap_bits) + " bits exceeded"),
          cap(cap_bits) {}
    long long cap;
};

/// Exhaustive search (or the sieve feeding it) would exceed its budget.
class SearchBudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShellTooSmall : public PreconditionViolation {
public:
    ShellTooSmall(int K, int h)
        : PreconditionViolation("shell K=" + std::to_string(K) + " is below h+1=" + std::to_string(h + 1)) {}
};

class MalformedEncoding : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RadiusTooLarge : public PreconditionViolation {
public:
    using PreconditionViolation::PreconditionViolation;
};

}  // namespace bhforge
