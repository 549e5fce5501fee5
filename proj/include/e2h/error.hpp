#pragma once

#include <stdexcept>
#include <string>

namespace e2h {

/// A TheoryParams (or other input) invariant does not hold. The message names it.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// A map or functional was evaluated outside its natural domain.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A bracketed root search could not locate a sign change.
class RootFindError : public std::runtime_error {
 public:
  explicit RootFindError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace e2h
