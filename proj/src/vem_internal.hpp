#pragma once

#include "vemdd/mesh.hpp"
#include "vemdd/quadrature.hpp"
#include "vemdd/vem.hpp"

#include <Eigen/Core>

#include <vector>

namespace vemdd::detail {

/// Polygon in local 2D coordinates, fan-triangulated from the vertex average.
/// Points are npts x 2; weights are signed by triangle orientation.
quadrature::PointSet polygon_quadrature(const std::vector<Eigen::Vector2d>& vertices, int degree);

/// Planar 3D face of a mesh: orthonormal frame and local coordinates.
struct FaceFrame {
  Eigen::Vector3d origin;  ///< face centroid
  Eigen::Vector3d normal;  ///< unit normal of the stored loop
  Eigen::Vector3d t1;
  Eigen::Vector3d t2;
  std::vector<Eigen::Vector2d> local; ///< loop vertices in (t1, t2) coordinates, counter-clockwise

  [[nodiscard]] Eigen::Vector3d to_global(const Eigen::Vector2d& xi) const { return origin + xi.x() * t1 + xi.y() * t2; }
};

FaceFrame face_frame(const PolyMesh& mesh, int face);

/// Face quadrature in 3D: points npts x 3.
quadrature::PointSet face_quadrature(const PolyMesh& mesh, int face, int degree);

/// Edge quadrature in 3D (or 2D with z = 0): points npts x 3, weights sum to the length.
quadrature::PointSet edge_quadrature(const PolyMesh& mesh, int edge, int degree);

/// Value of one DOF functional applied to u.
double interpolate_dof(const DofMap& dofs, int dof, const ScalarField& u);

} // namespace vemdd::detail
