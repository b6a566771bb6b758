#pragma once

#include <stdexcept>
#include <string>

namespace fairlab {

// Machine-parsable error codes; the CLI prints them as "code=<NAME>".
enum class ErrorCode {
    negative_mass,
    not_normalized,
    missing_group,
    undefined_point,
    undefined_rate,
    base_rate_mismatch,
    delta_out_of_range,
    degenerate_output,
    infeasible,
    undefined_constraint,
    too_large,
    param_out_of_range,
    tied_optimum,
    no_fair_member,
    not_applicable,
    unbounded,
    divide_by_zero,
    undefined_value,
    unsupported_model,
    invalid_argument,
    io_error,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::negative_mass: return "NEGATIVE_MASS";
        case ErrorCode::not_normalized: return "NOT_NORMALIZED";
        case ErrorCode::missing_group: return "MISSING_GROUP";
        case ErrorCode::undefined_point: return "UNDEFINED_POINT";
        case ErrorCode::undefined_rate: return "UNDEFINED_RATE";
        case ErrorCode::base_rate_mismatch: return "BASE_RATE_MISMATCH";
        case ErrorCode::delta_out_of_range: return "DELTA_OUT_OF_RANGE";
        case ErrorCode::degenerate_output: return "DEGENERATE_OUTPUT";
        case ErrorCode::infeasible: return "INFEASIBLE";
        case ErrorCode::undefined_constraint: return "UNDEFINED_CONSTRAINT";
        case ErrorCode::too_large: return "TOO_LARGE";
        case ErrorCode::param_out_of_range: return "PARAM_OUT_OF_RANGE";
        case ErrorCode::tied_optimum: return "TIED_OPTIMUM";
        case ErrorCode::no_fair_member: return "NO_FAIR_MEMBER";
        case ErrorCode::not_applicable: return "NOT_APPLICABLE";
        case ErrorCode::unbounded: return "UNBOUNDED";
        case ErrorCode::divide_by_zero: return "DIVIDE_BY_ZERO";
        case ErrorCode::undefined_value: return "UNDEFINED";
        case ErrorCode::unsupported_model: return "UNSUPPORTED_MODEL";
        case ErrorCode::invalid_argument: return "INVALID_ARGUMENT";
        case ErrorCode::io_error: return "IO_ERROR";
    }
    return "UNKNOWN";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    const char* code_name() const noexcept { return error_code_name(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace fairlab
