#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace berwald {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Evaluation left the real domain of an expression or jet operation.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InadmissiblePoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// k10 vanishes where the derived coefficients a, b, c need to divide by it.
class MirroredCase : public DomainError {
 public:
  using DomainError::DomainError;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace berwald
