#pragma once

#include <stdexcept>
#include <string>

namespace umfloc {

enum class ErrorKind {
  Domain,       // argument outside the mathematical domain of an operation
  Config,       // invalid configuration or precondition
  Unsupported,  // operation not available for this model
  Degenerate,   // input carries no usable information (e.g. all-zero profile)
  Dimension,    // matrix shapes do not conform
  Io,           // file or parse failure
  Solver,       // numerical routine failed on every attempt
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace umfloc
