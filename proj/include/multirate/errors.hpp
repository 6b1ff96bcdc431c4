#pragma once

#include <stdexcept>
#include <string>

namespace multirate {

struct InvalidMesh : std::runtime_error {
  explicit InvalidMesh(const std::string& what) : std::runtime_error(what) {}
};

struct ConstraintViolation : std::runtime_error {
  explicit ConstraintViolation(const std::string& what) : std::runtime_error(what) {}
};

struct CannotPromote : std::runtime_error {
  explicit CannotPromote(const std::string& what) : std::runtime_error(what) {}
};

struct MeshMismatch : std::runtime_error {
  explicit MeshMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct MeshSizeError : std::runtime_error {
  explicit MeshSizeError(const std::string& what) : std::runtime_error(what) {}
};

struct MissingExact : std::runtime_error {
  explicit MissingExact(const std::string& what) : std::runtime_error(what) {}
};

struct IterationDiverged : std::runtime_error {
  double last_residual;
  IterationDiverged(const std::string& what, double residual)
      : std::runtime_error(what), last_residual(residual) {}
};

struct IndexError : std::out_of_range {
  explicit IndexError(const std::string& what) : std::out_of_range(what) {}
};

struct SingularMatrix : std::runtime_error {
  explicit SingularMatrix(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace multirate
