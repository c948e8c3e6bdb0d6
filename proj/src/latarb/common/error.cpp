#include "latarb/common/error.hpp"

namespace latarb {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ok: return "ok";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::insufficient_depth: return "insufficient_depth";
        case ErrorCode::insufficient_history: return "insufficient_history";
        case ErrorCode::no_convergence: return "no_convergence";
        case ErrorCode::domain_error: return "domain_error";
        case ErrorCode::schema_mismatch: return "schema_mismatch";
        case ErrorCode::not_nested: return "not_nested";
        case ErrorCode::stale_artifact: return "stale_artifact";
        case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

bool is_validation_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument:
        case ErrorCode::parse_error:
        case ErrorCode::io_error:
        case ErrorCode::schema_mismatch:
        case ErrorCode::not_nested:
        case ErrorCode::stale_artifact:
            return true;
        default:
            return false;
    }
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace latarb
