#pragma once

#include <stdexcept>
#include <string>

namespace fracwave {

enum class ErrorKind {
  Domain,      // precondition or invariant violated by the caller
  Numerical,   // quadrature non-convergence, blow-up, degenerate fit
  Io,
};

/// Every error carries the module that raised it ("model", "quadrature", ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

class DomainError : public Error {
 public:
  DomainError(std::string module, const std::string& message)
      : Error(ErrorKind::Domain, std::move(module), message) {}
};

class NumericalError : public Error {
 public:
  NumericalError(std::string module, const std::string& message)
      : Error(ErrorKind::Numerical, std::move(module), message) {}
};

}  // namespace fracwave
