#pragma once

#include "vemdd/decomposition.hpp"
#include "vemdd/linalg.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vemdd {

enum class CoarseKind { GDSW, GDSWStar, RGDSW };

[[nodiscard]] const char* to_string(CoarseKind kind);
/// Accepts "gdsw", "gdsw*", "gdswstar", "rgdsw" (case-insensitive); throws ConfigError.
[[nodiscard]] CoarseKind parse_coarse_kind(const std::string& name);

/// What to do with an edge/face component that touches no vertex component
/// under the vertex-based kinds.
enum class OrphanPolicy {
  Promote, ///< give it its own column with value 1
  Error    ///< throw OrphanComponentError
};

struct CoarseBasis {
  CoarseKind kind = CoarseKind::GDSW;
  SparseMatrix phi;                          ///< free DOFs x N_phi
  /// Components that define each column: the vertex (or single component)
  /// first, then any components it spreads onto.
  std::vector<std::vector<int>> provenance;
  std::vector<int> promoted_orphans;         ///< component ids that got their own column

  [[nodiscard]] int size() const noexcept { return phi.cols(); }
};

/// Interface rows of Phi (rows = free DOFs; interior rows are empty).
/// Entry values are the DOF functionals of the constant 1 scaled by the
/// column weight, so the columns sum to the constant-1 DOF vector on the
/// interface.
[[nodiscard]] CoarseBasis interface_values(CoarseKind kind, const InterfaceClassification& classification,
                                           const DofMap& dofs, OrphanPolicy orphans = OrphanPolicy::Promote);

/// Fills interior rows with the discrete harmonic extension
/// -K_II^{-1} K_IG Phi_G, one factorization per subdomain interior.
/// Throws SingularMatrixError naming the subdomain on failure.
[[nodiscard]] SparseMatrix harmonic_extension(const SparseMatrix& k, const Partition& partition,
                                              const SparseMatrix& phi_interface);

/// interface_values followed by harmonic_extension.
[[nodiscard]] CoarseBasis build_coarse_basis(CoarseKind kind, const SparseMatrix& k, const Partition& partition,
                                             const InterfaceClassification& classification, const DofMap& dofs,
                                             OrphanPolicy orphans = OrphanPolicy::Promote);

struct CoarseOperator {
  SparseMatrix k0; ///< Phi^T K Phi
  Factorization factor;
};

/// Forms and factorizes K0. A failed factorization is rethrown with the
/// columns of Phi whose diagonal entries in K0 are tiny or whose basis
/// functions are (nearly) linearly dependent on earlier ones.
[[nodiscard]] CoarseOperator build_coarse_operator(const SparseMatrix& k, const SparseMatrix& phi);

/// Writes the mesh with selected Phi columns as VTK point data on vertex DOFs.
void export_basis_vtk(const PolyMesh& mesh, const DofMap& dofs, const CoarseBasis& basis,
                      const std::vector<int>& columns, const std::filesystem::path& path);

} // namespace vemdd
