#pragma once

#include <stdexcept>
#include <string>

namespace etahardy {

enum class ErrorCode {
    invalid_argument,
    not_finite_or_too_large,
    degenerate_basepoint,
    not_a_homomorphism,
    unsupported_geometry,
    invalid_support,
    invalid_geometry,
    invalid_input,
    empty_cube,
    config_error,
    overflow,
    parse_error,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::not_finite_or_too_large: return "not-finite-or-too-large";
    case ErrorCode::degenerate_basepoint: return "degenerate-basepoint";
    case ErrorCode::not_a_homomorphism: return "not-a-homomorphism";
    case ErrorCode::unsupported_geometry: return "unsupported-geometry";
    case ErrorCode::invalid_support: return "invalid-support";
    case ErrorCode::invalid_geometry: return "invalid-geometry";
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::empty_cube: return "empty-cube";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::overflow: return "overflow";
    case ErrorCode::parse_error: return "parse-error";
    }
    return "error";
}

} // namespace etahardy
