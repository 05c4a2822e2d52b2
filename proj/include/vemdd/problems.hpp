#pragma once

#include "vemdd/vem.hpp"

#include <string>
#include <vector>

namespace vemdd {

/// Manufactured Poisson problem -Laplace(u) = f on the unit box, u = g on the boundary.
struct Problem {
  std::string name;
  int dim = 2;
  int degree = -1; ///< polynomial degree of u (3 for the cubic problems)
  ScalarField f;
  ScalarField u; ///< exact solution, also the boundary data
  VectorField grad_u;
};

/// Built-in problems:
///   "benchmark"     u = x^3 + y^2 (+ 3 z^3),  f = -6x - 2 (- 18 z)
///   "constant"  u = 1, f = 0
///   "linear"    u = 1 + 2x - y (+ z/2)
///   "quadratic" u = 1 + x^2 + xy - 2y^2 (+ z^2 - yz)
/// Throws ConfigError for an unknown name or dim.
[[nodiscard]] Problem builtin_problem(const std::string& name, int dim);
[[nodiscard]] std::vector<std::string> builtin_problem_names();

} // namespace vemdd
