#pragma once

#include <stdexcept>
#include <string>

namespace noisefridge {

enum class ErrorKind {
  InvalidArgument,
  Numerical,
  Convergence,
  Config,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Every error thrown by the library carries the module that raised it, so the
// command-line front end can report provenance without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

}  // namespace noisefridge
