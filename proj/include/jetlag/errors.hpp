#pragma once

#include <stdexcept>
#include <string>

namespace jetlag {

/// A point or parameter lies outside the domain where a formula is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The fundamental metric is (numerically) degenerate at the evaluation point.
class SingularMetricError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A finite-difference probe left the model's valid domain.
class StencilError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace jetlag
