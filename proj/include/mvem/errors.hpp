#pragma once

#include <stdexcept>
#include <string>

namespace mvem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class InvalidState : public Error {
public:
  using Error::Error;
};

class DegenerateElement : public Error {
public:
  using Error::Error;
};

class DegenerateEdge : public Error {
public:
  using Error::Error;
};

class NonManifoldMesh : public Error {
public:
  using Error::Error;
};

class NotStarShaped : public Error {
public:
  using Error::Error;
};

/// A Gram-Schmidt pivot or an SVD nullspace did not have the expected rank.
class RankDeficiency : public Error {
public:
  using Error::Error;
};

/// A local SPD matrix could not be factorized; carries the condition estimate.
class ConditioningError : public Error {
public:
  ConditioningError(const std::string& what, double condition)
    : Error(what + " (cond ~ " + std::to_string(condition) + ")"), condition_(condition) {}

  double condition() const noexcept { return condition_; }

private:
  double condition_;
};

class InvalidCoefficient : public Error {
public:
  using Error::Error;
};

class SolverFailure : public Error {
public:
  using Error::Error;
};

} // namespace mvem
