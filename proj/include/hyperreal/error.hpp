#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hyperreal
{

// Machine-readable failure classes. The CLI maps these onto its error output.
enum class ErrorCode {
    precision_cap_exceeded,
    unsupported,
    division_by_possibly_zero,
    domain_error,
    non_integer_bound,
    non_integrable,
    undeclared_singularity,
    overlap_detected,
    invalid_argument,
    parse_error,
};

inline std::string_view error_code_name(ErrorCode code)
{
    switch (code) {
        case ErrorCode::precision_cap_exceeded: return "precision-cap-exceeded";
        case ErrorCode::unsupported: return "scale-overflow";
        case ErrorCode::division_by_possibly_zero: return "division-by-possibly-zero";
        case ErrorCode::domain_error: return "domain-error";
        case ErrorCode::non_integer_bound: return "non-integer-bound";
        case ErrorCode::non_integrable: return "non-integrable";
        case ErrorCode::undeclared_singularity: return "undeclared-singularity";
        case ErrorCode::overlap_detected: return "overlap-detected";
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::parse_error: return "parse-error";
    }
    return "error";
}

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string &message) : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &message)
{
    throw Error(code, message);
}

} // namespace hyperreal
