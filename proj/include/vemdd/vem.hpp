#pragma once

#include "vemdd/linalg.hpp"
#include "vemdd/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <vector>

namespace vemdd {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

// ---------------------------------------------------------------------------
// Degrees of freedom

enum class EntityKind { Vertex, Edge, Face, Cell };

struct DofEntity {
  EntityKind kind;
  int index;
};

/// Enumeration of VEM degrees of freedom for order k in {1, 2}.
///
/// Global numbering: vertex values first, then one mean-value moment per
/// edge (k=2), then one per face (3D, k=2), then one per cell (k=2). Every
/// moment is the mean of the function over its entity, so the interpolant of
/// the constant 1 has all DOFs equal to 1.
class DofMap {
public:
  /// Throws UnsupportedOrderError unless k is 1 or 2.
  DofMap(const PolyMesh& mesh, int k);

  [[nodiscard]] int order() const noexcept { return k_; }
  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int num_dofs() const noexcept { return static_cast<int>(entities_.size()); }
  [[nodiscard]] int num_free() const noexcept { return static_cast<int>(free_to_global_.size()); }

  [[nodiscard]] int vertex_dof(int v) const { return v; }
  [[nodiscard]] int edge_dof(int e) const { return edge_offset_ + e; }
  [[nodiscard]] int face_dof(int f) const { return face_offset_ + f; }
  [[nodiscard]] int cell_dof(int c) const { return cell_offset_ + c; }

  /// DOFs of a cell in element-local order:
  /// 2D: loop vertices, loop edges (k=2), cell moment (k=2);
  /// 3D: cell_vertices, cell_edges (k=2), cell faces (k=2), cell moment (k=2).
  [[nodiscard]] std::vector<int> cell_dofs(int c) const;

  [[nodiscard]] const DofEntity& entity(int dof) const { return entities_[dof]; }
  /// Mesh vertices in the closure of the supporting entity of a DOF.
  [[nodiscard]] std::vector<int> entity_vertices(int dof) const;

  [[nodiscard]] bool is_dirichlet(int dof) const { return global_to_free_[dof] < 0; }
  /// Free index of a global DOF, -1 for Dirichlet DOFs.
  [[nodiscard]] int free_index(int dof) const { return global_to_free_[dof]; }
  [[nodiscard]] int global_index(int free) const { return free_to_global_[free]; }
  [[nodiscard]] const std::vector<int>& free_dofs() const noexcept { return free_to_global_; }

  [[nodiscard]] const PolyMesh& mesh() const noexcept { return *mesh_; }

private:
  const PolyMesh* mesh_;
  int k_;
  int dim_;
  int edge_offset_ = 0;
  int face_offset_ = 0;
  int cell_offset_ = 0;
  std::vector<DofEntity> entities_;
  std::vector<int> global_to_free_;
  std::vector<int> free_to_global_;
};

/// Closed-form total DOF count on an n^dim structured box.
[[nodiscard]] long structured_dof_count(int dim, int n, int k);

/// DOF interpolant of a field (vertex values, entity means by quadrature).
[[nodiscard]] std::vector<double> interpolate(const DofMap& dofs, const ScalarField& u);

/// DOF values of the constant function 1 on each entity kind.
[[nodiscard]] double constant_one_dof_value(EntityKind kind);

// ---------------------------------------------------------------------------
// Scaled monomials

/// Monomials ((x - center)/diameter)^alpha, |alpha| <= k, ordered by degree.
class ScaledMonomials {
public:
  ScaledMonomials(int dim, int k, const Eigen::Vector3d& center, double diameter);

  [[nodiscard]] int size() const noexcept { return static_cast<int>(exponents_.size()); }
  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int order() const noexcept { return k_; }
  [[nodiscard]] const std::array<int, 3>& exponent(int a) const { return exponents_[a]; }
  [[nodiscard]] int degree(int a) const;
  [[nodiscard]] const Eigen::Vector3d& center() const noexcept { return center_; }
  [[nodiscard]] double diameter() const noexcept { return h_; }

  [[nodiscard]] Eigen::VectorXd values(const Eigen::Vector3d& x) const;
  /// size() x dim matrix of gradients.
  [[nodiscard]] Eigen::MatrixXd gradients(const Eigen::Vector3d& x) const;
  /// Laplacians at x.
  [[nodiscard]] Eigen::VectorXd laplacians(const Eigen::Vector3d& x) const;

private:
  int dim_;
  int k_;
  Eigen::Vector3d center_;
  double h_;
  std::vector<std::array<int, 3>> exponents_;
};

/// Number of polynomials of total degree <= k in `dim` variables (0 for k < 0).
[[nodiscard]] constexpr int polynomial_dimension(int dim, int k) {
  if (k < 0) {
    return 0;
  }
  return dim == 2 ? (k + 1) * (k + 2) / 2 : (k + 1) * (k + 2) * (k + 3) / 6;
}

// ---------------------------------------------------------------------------
// Element operators

enum class Stabilization {
  DRecipe, ///< diag(max(K_c(i,i), h^{d-2}))
  DofiDofi ///< h^{d-2} I
};

/// Projector matrices of one element. "Star" matrices map element DOFs to
/// coefficients in the scaled monomial basis; Pi_nabla = D * pi_nabla_star is
/// the DOF form.
struct ElementProjectors {
  int k = 1;
  double measure = 0.0;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  double diameter = 0.0;
  Eigen::MatrixXd D;              ///< ndof x npoly: DOFs of each monomial
  Eigen::MatrixXd B;              ///< npoly x ndof
  Eigen::MatrixXd G;              ///< B * D
  Eigen::MatrixXd H;              ///< mass matrix of the monomials
  Eigen::MatrixXd pi_nabla_star;  ///< npoly x ndof
  Eigen::MatrixXd pi_zero_star;   ///< npoly x ndof

  [[nodiscard]] int num_dofs() const { return static_cast<int>(B.cols()); }
  [[nodiscard]] Eigen::MatrixXd pi_nabla() const { return D * pi_nabla_star; }
  [[nodiscard]] Eigen::MatrixXd pi_zero() const { return D * pi_zero_star; }
};

struct ElementOperators {
  int cell = -1;
  ElementProjectors projectors;
  Eigen::MatrixXd consistency;   ///< Pi*^T G~ Pi*
  Eigen::MatrixXd stabilization; ///< (I - Pi)^T S (I - Pi)
  Eigen::MatrixXd stiffness;     ///< consistency + stabilization
  Eigen::VectorXd load;          ///< int f Pi0 phi_i (empty without f)
};

/// Polygon projectors in local 2D coordinates (vertices counter-clockwise).
/// DOF order: vertices, edge means (k=2, edge i from v_i to v_{i+1}), mean (k=2).
[[nodiscard]] ElementProjectors polygon_projectors(const std::vector<Eigen::Vector2d>& vertices, int k,
                                                   long cell_id = -1);

/// Projectors of a mesh cell (2D polygon or 3D polyhedron), local DOF order
/// as DofMap::cell_dofs. Throws AssemblyError on degenerate geometry.
[[nodiscard]] ElementProjectors compute_projectors(const PolyMesh& mesh, int cell, int k);

/// Quadrature points (rows) and weights over a cell, exact for polynomials of
/// the given degree.
struct CellQuadrature {
  Eigen::MatrixXd points; ///< npts x 3
  Eigen::VectorXd weights;
};
[[nodiscard]] CellQuadrature cell_quadrature(const PolyMesh& mesh, int cell, int degree);

[[nodiscard]] ElementOperators element_operators(const PolyMesh& mesh, int cell, int k, Stabilization stab,
                                                 const ScalarField& f = {});

// ---------------------------------------------------------------------------
// Global system

struct AssembledSystem {
  SparseMatrix K;                    ///< free x free
  std::vector<double> b;             ///< includes the Dirichlet lifting
  std::vector<double> dirichlet;     ///< global-length, g interpolant on Dirichlet DOFs, 0 elsewhere
  const PolyMesh* mesh = nullptr;
  const DofMap* dofs = nullptr;

  /// Global DOF vector from free values plus Dirichlet data.
  [[nodiscard]] std::vector<double> expand(std::span<const double> free_values) const;
};

/// Assembles K over free DOFs and b = F_h - K_{free,D} g_D. Deterministic:
/// element contributions are summed in cell order.
[[nodiscard]] AssembledSystem assemble(const PolyMesh& mesh, const DofMap& dofs, const ScalarField& f,
                                       const ScalarField& g, Stabilization stab = Stabilization::DRecipe);

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0; ///< H1 seminorm
};

/// ||u - Pi0 u_h||_L2 and |u - Pi_nabla u_h|_H1, cell by cell.
[[nodiscard]] ErrorNorms compute_errors(const PolyMesh& mesh, const DofMap& dofs, std::span<const double> uh,
                                        const ScalarField& u, const VectorField& grad_u);

} // namespace vemdd
