#pragma once

#include <stdexcept>
#include <string>

namespace eis {

// Error categories; mirrored 1:1 by the C API status codes.
enum class ErrorCode {
  argument = 1,
  domain = 2,
  undefined_region = 3,
  numeric = 4,
  io = 5,
  no_convergence = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string& w) : Error(ErrorCode::argument, w) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorCode::domain, w) {}
};

// Accuracy lookup outside every contour region of the noise model.
struct UndefinedRegionError : Error {
  explicit UndefinedRegionError(const std::string& w)
      : Error(ErrorCode::undefined_region, w) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorCode::numeric, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::io, w) {}
};

}  // namespace eis
