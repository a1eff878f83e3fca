#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

enum class ErrorCode {
  Domain = 1,       // argument outside the operation's domain
  Instability,      // integrator step too large
  Resolution,       // grid or quadrature cannot resolve the state
  Contract,         // caller violated a precondition (e.g. unnormalized state)
  TrajectoryAbort,  // zero norm after a step
  Io,
  Config,
  Verification,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const char* what) {
  if (!ok) throw Error(code, what);
}

}  // namespace collapse
