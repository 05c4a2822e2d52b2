#pragma once

#include "vemdd/mesh.hpp"
#include "vemdd/vem.hpp"

#include <array>
#include <vector>

namespace vemdd {

/// Nonoverlapping cell partition plus the DOF sets derived from it.
/// DOF indices in every set are free indices (Dirichlet DOFs never appear).
struct Partition {
  int num_subdomains = 0;
  std::vector<int> cell_subdomain;                ///< cell -> subdomain
  std::vector<std::vector<int>> subdomain_cells;  ///< ascending cell lists

  // Filled by assign_dofs / grow_overlap.
  std::vector<std::vector<int>> dof_sharing;      ///< free DOF -> ascending subdomains whose cells support it
  std::vector<std::vector<int>> nonoverlap_dofs;  ///< closure DOFs of own cells
  std::vector<int> interior_dofs;                 ///< multiplicity 1
  std::vector<int> interface_dofs;                ///< multiplicity >= 2

  int overlap_levels = -1;                        ///< -1 until grow_overlap ran
  std::vector<std::vector<int>> overlap_cells;
  std::vector<std::vector<int>> overlap_dofs;
};

/// Assigns each cell to the box of a uniform grid over the mesh bounding box
/// that contains its centroid. Centroids on a box boundary go to the lower
/// box. grid[2] is ignored in 2D. Throws PartitionError listing empty boxes.
[[nodiscard]] Partition partition_geometric(const PolyMesh& mesh, std::array<int, 3> grid);

/// Greedy breadth-first growing of n connected pieces of about equal size,
/// for meshes where geometric boxes come out empty.
[[nodiscard]] Partition partition_graph_growing(const PolyMesh& mesh, int n);

/// Partition from explicit cell labels in [0, n).
[[nodiscard]] Partition partition_from_labels(const PolyMesh& mesh, std::vector<int> labels);

/// Computes sharing sets, nonoverlapping DOF sets and the interior/interface split.
void assign_dofs(Partition& partition, const DofMap& dofs);

/// Overlapping subdomains: cells within `levels` facet-neighbour steps of the
/// subdomain, and the free DOFs in their closure. Calls assign_dofs if needed.
void grow_overlap(Partition& partition, const PolyMesh& mesh, const DofMap& dofs, int levels);

/// Cell-adjacency lists through shared facets (edges in 2D, faces in 3D).
[[nodiscard]] std::vector<std::vector<int>> facet_adjacency(const PolyMesh& mesh);

enum class ComponentType { Vertex, Edge, Face };

[[nodiscard]] const char* to_string(ComponentType type);

struct InterfaceComponent {
  ComponentType type;
  std::vector<int> dofs;    ///< ascending free indices
  std::vector<int> sharing; ///< ascending subdomains
};

struct InterfaceClassification {
  std::vector<InterfaceComponent> components;
  std::vector<int> dof_component;                 ///< free DOF -> component, -1 for interior
  /// For each non-Vertex component, the Vertex components adjacent to it:
  /// their sharing set contains its sharing set and they meet in a cell.
  std::vector<std::vector<int>> adjacent_vertices;

  [[nodiscard]] std::size_t count(ComponentType type) const;
};

/// Groups interface DOFs by sharing set, splits each group into pieces that
/// are connected through common cells, and types each piece by multiplicity.
[[nodiscard]] InterfaceClassification classify_interface(const Partition& partition, const DofMap& dofs);

} // namespace vemdd
