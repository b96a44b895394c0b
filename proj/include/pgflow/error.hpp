#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pgflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// GᵀG is not numerically invertible, so the classical projector is undefined.
class SingularGram : public Error {
 public:
  explicit SingularGram(double condition)
      : Error("singular Gram matrix (condition number " +
              std::to_string(condition) + ")"),
        condition_(condition) {}

  [[nodiscard]] double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class NonFiniteEvaluation : public Error {
 public:
  using Error::Error;
};

class DegenerateDepth : public Error {
 public:
  using Error::Error;
};

/// Parse failure with the byte offset into the source text.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownVariable : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

class UnknownFunction : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

}  // namespace pgflow
