#pragma once

#include <stdexcept>
#include <string>

namespace thstab {

enum class ErrorKind {
  InvalidArgument,     // bad order, size mismatch, bad configuration
  Io,                  // unreadable or malformed input file
  Topology,            // non-conforming mesh
  DegenerateElement,   // |J| <= 0 somewhere
  UnsupportedMesh,     // mesh outside the assumptions of an operation
  ConditionViolation,  // integrand condition fails (non-affine 3D)
  Numerical,           // factorization / eigen iteration failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Process exit code for the command-line driver.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Io:
      return 2;
    case ErrorKind::Topology:
    case ErrorKind::DegenerateElement:
    case ErrorKind::UnsupportedMesh:
      return 3;
    case ErrorKind::ConditionViolation:
      return 4;
    case ErrorKind::Numerical:
      return 5;
  }
  return 1;
}

}  // namespace thstab
