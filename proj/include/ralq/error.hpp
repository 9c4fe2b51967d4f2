#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ralq {

/// Coarse failure classes. The CLI maps each one onto a distinct exit code.
enum class ErrorCategory {
    Structural,     // dimension mismatch, malformed in-memory input
    Configuration,  // invalid option values (e.g. too few Monte-Carlo samples)
    Parse,          // scenario / config file errors
    Assumption,     // a required structural assumption does not hold
    Singularity,    // near-singular linear solve in a recursion
    NonConvergence, // fixed-point iteration did not converge
    Infeasible,     // risk budget below the achievable infimum
    Divergence,     // non-finite state in a rollout
    Breakdown,      // LEQG well-posedness lost
    Unsupported,    // outside the implemented model class
};

std::string_view to_string(ErrorCategory category);

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Raised by guarded solves; carries the recursion stage that failed (-1 if none).
class SingularityError : public Error {
public:
    SingularityError(const std::string& message, int stage)
        : Error(ErrorCategory::Singularity, message), stage_(stage) {}
    int stage() const noexcept { return stage_; }

private:
    int stage_;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& message, double last_residual)
        : Error(ErrorCategory::NonConvergence, message), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& message, int first_bad_index)
        : Error(ErrorCategory::Divergence, message), index_(first_bad_index) {}
    int first_bad_index() const noexcept { return index_; }

private:
    int index_;
};

class BreakdownError : public Error {
public:
    BreakdownError(const std::string& message, int stage)
        : Error(ErrorCategory::Breakdown, message), stage_(stage) {}
    int stage() const noexcept { return stage_; }

private:
    int stage_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& field, const std::string& message)
        : Error(ErrorCategory::Parse, field + ": " + message), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

[[noreturn]] inline void structural_error(const std::string& message) {
    throw Error(ErrorCategory::Structural, message);
}

} // namespace ralq
