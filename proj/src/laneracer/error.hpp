#pragma once

#include <stdexcept>
#include <string>

namespace lr {

enum class ErrorCode {
  invalid_argument = 1,
  shape_mismatch,
  io,
  format,
  version,
  checksum,
  numeric,
  runtime,
};

// Every failure inside the core is raised as lr::Error; the C API maps the
// code onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace lr
