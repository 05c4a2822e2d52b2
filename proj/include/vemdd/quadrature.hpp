#pragma once

#include <Eigen/Core>

#include <vector>

namespace vemdd::quadrature {

/// 1D rule on [0,1].
struct Rule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Gauss-Jacobi rule on [0,1] for the weight (1-u)^alpha, exact up to degree 2n-1.
/// alpha = 0 gives Gauss-Legendre.
[[nodiscard]] Rule1D gauss_jacobi(int n, int alpha);

[[nodiscard]] inline Rule1D gauss_legendre(int n) { return gauss_jacobi(n, 0); }

/// Rule on a simplex given in barycentric-free form: points as rows.
struct SimplexRule {
  Eigen::MatrixXd points;  ///< npts x dim, reference coordinates
  Eigen::VectorXd weights; ///< sum to the reference simplex measure
};

/// Collapsed (conical product) rule on the reference triangle {x,y >= 0, x+y <= 1},
/// n points per direction, exact for total degree 2n-1.
[[nodiscard]] const SimplexRule& reference_triangle(int n);

/// Same on the reference tetrahedron, exact for total degree 2n-1.
[[nodiscard]] const SimplexRule& reference_tetrahedron(int n);

/// Physical-space quadrature: points (npts x dim) and weights. Weights may be
/// negative when built from signed sub-simplices of a non-convex cell.
struct PointSet {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;

  [[nodiscard]] Eigen::Index size() const { return weights.size(); }
};

/// Number of points per direction such that the collapsed rules integrate
/// polynomials of the given total degree exactly.
[[nodiscard]] constexpr int points_for_degree(int degree) { return degree / 2 + 1; }

} // namespace vemdd::quadrature
