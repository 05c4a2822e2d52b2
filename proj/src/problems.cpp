#include "vemdd/problems.hpp"

#include "vemdd/error.hpp"

namespace vemdd {

std::vector<std::string> builtin_problem_names() { return {"benchmark", "constant", "linear", "quadratic"}; }

Problem builtin_problem(const std::string& name, int dim) {
  if (dim != 2 && dim != 3) {
    throw ConfigError("dimension must be 2 or 3");
  }
  const double w = dim == 3 ? 1.0 : 0.0; // switches the z terms on
  Problem p;
  p.name = name;
  p.dim = dim;
  if (name == "benchmark") {
    p.degree = 3;
    p.u = [w](const Point& x) { return x[0] * x[0] * x[0] + x[1] * x[1] + w * 3.0 * x[2] * x[2] * x[2]; };
    p.grad_u = [w](const Point& x) { return Point{3.0 * x[0] * x[0], 2.0 * x[1], w * 9.0 * x[2] * x[2]}; };
    p.f = [w](const Point& x) { return -6.0 * x[0] - 2.0 - w * 18.0 * x[2]; };
  } else if (name == "constant") {
    p.degree = 0;
    p.u = [](const Point&) { return 1.0; };
    p.grad_u = [](const Point&) { return Point{0.0, 0.0, 0.0}; };
    p.f = [](const Point&) { return 0.0; };
  } else if (name == "linear") {
    p.degree = 1;
    p.u = [w](const Point& x) { return 1.0 + 2.0 * x[0] - x[1] + w * 0.5 * x[2]; };
    p.grad_u = [w](const Point&) { return Point{2.0, -1.0, w * 0.5}; };
    p.f = [](const Point&) { return 0.0; };
  } else if (name == "quadratic") {
    p.degree = 2;
    p.u = [w](const Point& x) {
      return 1.0 + x[0] * x[0] + x[0] * x[1] - 2.0 * x[1] * x[1] + w * (x[2] * x[2] - x[1] * x[2]);
    };
    p.grad_u = [w](const Point& x) {
      return Point{2.0 * x[0] + x[1], x[0] - 4.0 * x[1] - w * x[2], w * (2.0 * x[2] - x[1])};
    };
    p.f = [w](const Point&) { return -(2.0 - 4.0 + w * 2.0); };
  } else {
    throw ConfigError("unknown problem '" + name + "' (expected benchmark, constant, linear, quadratic)");
  }
  return p;
}

} // namespace vemdd
