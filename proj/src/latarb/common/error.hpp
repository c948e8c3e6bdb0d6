#pragma once

#include <stdexcept>
#include <string>

namespace latarb {

enum class ErrorCode {
    ok = 0,
    invalid_argument,
    parse_error,
    io_error,
    insufficient_depth,
    insufficient_history,
    no_convergence,
    domain_error,
    schema_mismatch,
    not_nested,
    stale_artifact,
    internal,
};

const char* error_code_name(ErrorCode code);

// Validation errors map to CLI exit code 1, everything else to 2.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace latarb
