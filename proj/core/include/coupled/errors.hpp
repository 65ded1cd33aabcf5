#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coupled {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParam : public Error {
 public:
  using Error::Error;
};

class UnconnectableGraph : public Error {
 public:
  using Error::Error;
};

class NotConnected : public Error {
 public:
  using Error::Error;
};

class DegenerateConstraints : public Error {
 public:
  using Error::Error;
};

class InfeasibleInstance : public Error {
 public:
  using Error::Error;
};

class SplitMismatch : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class LocalityViolation : public Error {
 public:
  LocalityViolation(std::size_t node, std::size_t peer)
      : Error("node " + std::to_string(node) + " read from non-neighbor " +
              std::to_string(peer)),
        node_(node),
        peer_(peer) {}

  std::size_t node() const { return node_; }
  std::size_t peer() const { return peer_; }

 private:
  std::size_t node_;
  std::size_t peer_;
};

class NonFiniteIterate : public Error {
 public:
  explicit NonFiniteIterate(std::size_t iter)
      : Error("non-finite iterate at iteration " + std::to_string(iter)),
        iter_(iter) {}

  std::size_t iteration() const { return iter_; }

 private:
  std::size_t iter_;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class BoundViolated : public Error {
 public:
  BoundViolated(const std::string& what, double value, double bound)
      : Error(what + ": value " + std::to_string(value) + " violates bound " +
              std::to_string(bound)),
        value_(value),
        bound_(bound) {}

  double value() const { return value_; }
  double bound() const { return bound_; }

 private:
  double value_;
  double bound_;
};

class SingularKKT : public Error {
 public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::string reason)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + reason),
        line_(line),
        column_(column),
        reason_(std::move(reason)) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string reason_;
};

}  // namespace coupled
