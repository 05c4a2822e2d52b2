#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vemdd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed mesh or matrix file. Carries the 1-based line number.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class DuplicateSeedError : public Error {
public:
  DuplicateSeedError(std::size_t first, std::size_t second)
      : Error("duplicate Voronoi seeds " + std::to_string(first) + " and " + std::to_string(second)),
        first_(first), second_(second) {}
  [[nodiscard]] std::size_t first() const noexcept { return first_; }
  [[nodiscard]] std::size_t second() const noexcept { return second_; }

private:
  std::size_t first_;
  std::size_t second_;
};

/// Polynomial orders other than 1 and 2 are rejected.
class UnsupportedOrderError : public Error {
public:
  explicit UnsupportedOrderError(int k)
      : Error("unsupported VEM order k=" + std::to_string(k) +
              ": the GDSW-type coarse spaces built here are only valid for k=1,2 "
              "(constant face values do not capture the coarse null space for k>2)"),
        order_(k) {}
  [[nodiscard]] int order() const noexcept { return order_; }

private:
  int order_;
};

/// Degenerate element geometry or inconsistent element data.
class AssemblyError : public Error {
public:
  AssemblyError(const std::string& what, long cell)
      : Error("cell " + std::to_string(cell) + ": " + what), cell_(cell) {}
  [[nodiscard]] long cell() const noexcept { return cell_; }

private:
  long cell_;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

/// A factorization met a negative pivot.
class NotSpdError : public Error {
public:
  using Error::Error;
};

/// A factorization met a (numerically) zero pivot.
class SingularMatrixError : public Error {
public:
  using Error::Error;
};

class PartitionError : public Error {
public:
  using Error::Error;
};

class OrphanComponentError : public Error {
public:
  explicit OrphanComponentError(std::size_t component)
      : Error("interface component " + std::to_string(component) + " is adjacent to no vertex component"),
        component_(component) {}
  [[nodiscard]] std::size_t component() const noexcept { return component_; }

private:
  std::size_t component_;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace vemdd
