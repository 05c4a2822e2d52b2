#include "vemdd/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace vemdd::quadrature {

namespace {

// Golub-Welsch on the Jacobi matrix of P^(alpha,0) over [-1,1], mapped to [0,1].
Rule1D golub_welsch(int n, int alpha) {
  const double a = alpha;
  const double b = 0.0;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double s = 2.0 * i + a + b;
    jac(i, i) = (i == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    if (i + 1 < n) {
      const double m = i + 1.0;
      const double t = 2.0 * m + a + b;
      const double off = std::sqrt(4.0 * m * (m + a) * (m + b) * (m + a + b) / (t * t * (t + 1.0) * (t - 1.0)));
      jac(i, i + 1) = off;
      jac(i + 1, i) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  // mu0 = int_{-1}^{1} (1-x)^a dx = 2^{a+1}/(a+1)
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
  Rule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.points[i] = 0.5 * (x + 1.0);
    rule.weights[i] = mu0 * v0 * v0 * std::pow(2.0, -a - 1.0);
  }
  return rule;
}

SimplexRule make_triangle(int n) {
  const Rule1D ru = gauss_jacobi(n, 1);
  const Rule1D rv = gauss_jacobi(n, 0);
  SimplexRule r;
  r.points.resize(n * n, 2);
  r.weights.resize(n * n);
  int q = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j, ++q) {
      const double u = ru.points[i];
      const double v = rv.points[j];
      r.points(q, 0) = u;
      r.points(q, 1) = v * (1.0 - u);
      r.weights(q) = ru.weights[i] * rv.weights[j];
    }
  }
  return r;
}

SimplexRule make_tetrahedron(int n) {
  const Rule1D ru = gauss_jacobi(n, 2);
  const Rule1D rv = gauss_jacobi(n, 1);
  const Rule1D rw = gauss_jacobi(n, 0);
  SimplexRule r;
  r.points.resize(n * n * n, 3);
  r.weights.resize(n * n * n);
  int q = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l, ++q) {
        const double u = ru.points[i];
        const double v = rv.points[j];
        const double w = rw.points[l];
        r.points(q, 0) = u;
        r.points(q, 1) = v * (1.0 - u);
        r.points(q, 2) = w * (1.0 - u) * (1.0 - v);
        r.weights(q) = ru.weights[i] * rv.weights[j] * rw.weights[l];
      }
    }
  }
  return r;
}

template <class Make>
const SimplexRule& cached(std::map<int, SimplexRule>& cache, std::mutex& m, int n, Make make) {
  std::lock_guard lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, make(n)).first;
  }
  return it->second;
}

} // namespace

Rule1D gauss_jacobi(int n, int alpha) {
  if (n < 1 || alpha < 0) {
    throw std::invalid_argument("gauss_jacobi: need n >= 1 and alpha >= 0");
  }
  return golub_welsch(n, alpha);
}

const SimplexRule& reference_triangle(int n) {
  static std::map<int, SimplexRule> cache;
  static std::mutex m;
  return cached(cache, m, n, make_triangle);
}

const SimplexRule& reference_tetrahedron(int n) {
  static std::map<int, SimplexRule> cache;
  static std::mutex m;
  return cached(cache, m, n, make_tetrahedron);
}

} // namespace vemdd::quadrature
