#pragma once

#include <stdexcept>
#include <string>

namespace teamopt {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong dimensions, empty bases, mismatched grids.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A user callback produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A sweep produced a non-finite value at `node()`.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, int node, double time)
      : Error(what), node_(node), time_(time) {}

  int node() const { return node_; }
  double time() const { return time_; }

 private:
  int node_;
  double time_;
};

/// A per-member linear system could not be solved. `node() < 0` means the
/// failure was in a coefficient (Galerkin) system rather than at a grid node.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, int member, int node)
      : Error(what), member_(member), node_(node) {}

  int member() const { return member_; }
  int node() const { return node_; }

 private:
  int member_;
  int node_;
};

}  // namespace teamopt
