#pragma once

#include <stdexcept>
#include <string>

namespace svem {

enum class ErrorCode {
    InvalidCell,           // zero/negative area, repeated vertices
    NonSimpleCell,         // self-intersecting polygon
    Orientation,           // clockwise cell in input
    MalformedFile,         // unparsable mesh/config file
    Conditioning,          // Gram/mass system condition number past threshold
    UnsupportedConfiguration,  // non-convex deficient cell (k >= eta_E)
    SolverFailure,         // linear/Newton solve did not converge
    NonFiniteValue,        // NaN/Inf encountered in user function or state
    InvalidArgument,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
          code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace svem
