#include "svem/errors.hpp"

namespace svem {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidCell: return "invalid-cell";
        case ErrorCode::NonSimpleCell: return "non-simple-cell";
        case ErrorCode::Orientation: return "orientation";
        case ErrorCode::MalformedFile: return "malformed-file";
        case ErrorCode::Conditioning: return "conditioning";
        case ErrorCode::UnsupportedConfiguration: return "unsupported-configuration";
        case ErrorCode::SolverFailure: return "solver-failure";
        case ErrorCode::NonFiniteValue: return "non-finite-value";
        case ErrorCode::InvalidArgument: return "invalid-argument";
    }
    return "unknown";
}

}  // namespace svem
