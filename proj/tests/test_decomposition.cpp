#include "vemdd/decomposition.hpp"
#include "vemdd/error.hpp"
#include "vemdd/mesh_generators.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>

using namespace vemdd;

namespace {

// (i, j, k) lattice index of a structured-box cell from its centroid.
std::array<int, 3> lattice_index(const PolyMesh& mesh, int c, int n) {
  const Point p = cell_centroid(mesh, c);
  std::array<int, 3> idx{0, 0, 0};
  for (int d = 0; d < mesh.dim(); ++d) {
    idx[d] = static_cast<int>(std::floor(p[d] * n));
  }
  return idx;
}

std::map<std::vector<int>, ComponentType> component_signature(const InterfaceClassification& ic) {
  std::map<std::vector<int>, ComponentType> out;
  for (const auto& comp : ic.components) {
    out.emplace(comp.dofs, comp.type);
  }
  return out;
}

void check_classification_invariants(const Partition& p, const DofMap& dofs, const InterfaceClassification& ic) {
  const PolyMesh& mesh = dofs.mesh();
  // interface DOFs covered exactly once
  std::vector<int> seen(dofs.num_free(), 0);
  for (std::size_t c = 0; c < ic.components.size(); ++c) {
    const auto& comp = ic.components[c];
    ASSERT_FALSE(comp.dofs.empty());
    for (int d : comp.dofs) {
      ++seen[d];
      EXPECT_EQ(p.dof_sharing[d], comp.sharing);
      EXPECT_EQ(ic.dof_component[d], static_cast<int>(c));
    }
    const std::size_t mult = comp.sharing.size();
    ASSERT_GE(mult, 2u);
    if (mesh.dim() == 2) {
      EXPECT_EQ(comp.type, mult >= 3 ? ComponentType::Vertex : ComponentType::Edge);
    } else if (mult == 2) {
      EXPECT_EQ(comp.type, ComponentType::Face);
    } else {
      EXPECT_EQ(comp.type, comp.dofs.size() == 1 ? ComponentType::Vertex : ComponentType::Edge);
    }
  }
  for (int d : p.interface_dofs) {
    EXPECT_EQ(seen[d], 1) << "dof " << d;
  }
  for (int d : p.interior_dofs) {
    EXPECT_EQ(seen[d], 0);
    EXPECT_EQ(ic.dof_component[d], -1);
  }

  // connected through common cells, and no two same-sharing components touch
  std::vector<std::vector<int>> dof_cells(dofs.num_free());
  std::vector<std::vector<int>> cell_free(mesh.num_cells());
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    for (int g : dofs.cell_dofs(c)) {
      const int f = dofs.free_index(g);
      if (f >= 0) {
        dof_cells[f].push_back(c);
        cell_free[c].push_back(f);
      }
    }
  }
  for (std::size_t c = 0; c < ic.components.size(); ++c) {
    const auto& comp = ic.components[c];
    std::set<int> reached{comp.dofs.front()};
    std::queue<int> queue;
    queue.push(comp.dofs.front());
    while (!queue.empty()) {
      const int d = queue.front();
      queue.pop();
      for (int cell : dof_cells[d]) {
        for (int e : cell_free[cell]) {
          if (p.dof_sharing[e] == comp.sharing && reached.insert(e).second) {
            queue.push(e);
          }
        }
      }
    }
    EXPECT_EQ(std::vector<int>(reached.begin(), reached.end()), comp.dofs) << "component " << c;
  }
}

} // namespace

TEST(GeometricPartition, EqualBlocks) {
  const PolyMesh mesh = generate_structured_box(3, 20);
  const Partition p = partition_geometric(mesh, {4, 4, 4});
  ASSERT_EQ(p.num_subdomains, 64);
  for (int s = 0; s < 64; ++s) {
    EXPECT_EQ(p.subdomain_cells[s].size(), 125u);
    for (int c : p.subdomain_cells[s]) {
      const auto idx = lattice_index(mesh, c, 20);
      EXPECT_EQ(s, idx[0] / 5 + 4 * (idx[1] / 5) + 16 * (idx[2] / 5));
    }
  }
}

TEST(GeometricPartition, BoundaryTiesGoLowAndEmptyBoxesListed) {
  // centroids at x = 0.25, 0.75 fall on the boundaries of a 4-box grid
  const PolyMesh mesh = generate_structured_box(2, 2);
  try {
    (void)partition_geometric(mesh, {4, 1, 1});
    FAIL() << "expected PartitionError";
  } catch (const PartitionError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("(1,0)"), std::string::npos) << what;
    EXPECT_NE(what.find("(3,0)"), std::string::npos) << what;
    EXPECT_EQ(what.find("(0,0)"), std::string::npos) << what;
    EXPECT_EQ(what.find("(2,0)"), std::string::npos) << what;
  }
}

TEST(GeometricPartition, VoronoiCover) {
  const PolyMesh mesh = generate_voronoi_2d(10000, 1);
  const Partition p = partition_geometric(mesh, {4, 4, 1});
  std::size_t total = 0;
  for (const auto& cells : p.subdomain_cells) {
    EXPECT_FALSE(cells.empty());
    total += cells.size();
  }
  EXPECT_EQ(total, 10000u);
}

TEST(GraphGrowing, ConnectedNonemptyCover) {
  const PolyMesh mesh = generate_voronoi_2d(500, 3);
  const Partition p = partition_graph_growing(mesh, 7);
  ASSERT_EQ(p.num_subdomains, 7);
  const auto adj = facet_adjacency(mesh);
  std::size_t total = 0;
  for (int s = 0; s < 7; ++s) {
    const auto& cells = p.subdomain_cells[s];
    ASSERT_FALSE(cells.empty());
    total += cells.size();
    std::set<int> reached{cells.front()};
    std::queue<int> queue;
    queue.push(cells.front());
    while (!queue.empty()) {
      const int c = queue.front();
      queue.pop();
      for (int n : adj[c]) {
        if (p.cell_subdomain[n] == s && reached.insert(n).second) {
          queue.push(n);
        }
      }
    }
    EXPECT_EQ(reached.size(), cells.size()) << "subdomain " << s;
  }
  EXPECT_EQ(total, 500u);
}

TEST(Overlap, ChainGainsOneCellEachSide) {
  std::vector<Point> v;
  for (int j = 0; j <= 1; ++j) {
    for (int i = 0; i <= 4; ++i) {
      v.push_back({0.25 * i, 1.0 * j, 0});
    }
  }
  std::vector<std::vector<int>> cells;
  for (int i = 0; i < 4; ++i) {
    cells.push_back({i, i + 1, i + 6, i + 5});
  }
  const PolyMesh mesh = PolyMesh::from_polygons(v, cells);
  const DofMap dofs(mesh, 1);
  Partition p = partition_from_labels(mesh, {0, 0, 1, 1});
  grow_overlap(p, mesh, dofs, 1);
  EXPECT_EQ(p.overlap_cells[0], (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(p.overlap_cells[1], (std::vector<int>{1, 2, 3}));
  EXPECT_TRUE(dofs.num_free() == 0); // a single strip has only boundary vertices
}

TEST(Overlap, ZeroLevelsIsNonoverlapping) {
  const PolyMesh mesh = generate_voronoi_2d(300, 2);
  const DofMap dofs(mesh, 2);
  Partition p = partition_geometric(mesh, {3, 3, 1});
  grow_overlap(p, mesh, dofs, 0);
  EXPECT_EQ(p.overlap_cells, p.subdomain_cells);
  EXPECT_EQ(p.overlap_dofs, p.nonoverlap_dofs);
}

TEST(Overlap, StructuredOneLayerMatchesLatticeOracle) {
  const int n = 20;
  const PolyMesh mesh = generate_structured_box(3, n);
  const DofMap dofs(mesh, 1);
  Partition p = partition_geometric(mesh, {4, 4, 4});
  grow_overlap(p, mesh, dofs, 1);
  std::vector<std::array<int, 3>> idx(mesh.num_cells());
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    idx[c] = lattice_index(mesh, c, n);
  }
  const auto in_block = [](const std::array<int, 3>& i, int s) {
    return i[0] / 5 == s % 4 && i[1] / 5 == (s / 4) % 4 && i[2] / 5 == s / 16;
  };
  for (int s = 0; s < 64; ++s) {
    std::vector<int> oracle;
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
      bool take = in_block(idx[c], s);
      for (int d = 0; d < 3 && !take; ++d) {
        for (int step : {-1, 1}) {
          std::array<int, 3> nb = idx[c];
          nb[d] += step;
          if (nb[d] >= 0 && nb[d] < n && in_block(nb, s)) {
            take = true;
          }
        }
      }
      if (take) {
        oracle.push_back(c);
      }
    }
    EXPECT_EQ(p.overlap_cells[s], oracle) << "subdomain " << s;
  }
  // subdomain (1,1,1) touches no boundary: 7^3 - 12*5 - 8
  EXPECT_EQ(p.overlap_cells[1 + 4 + 16].size(), 275u);
}

TEST(Overlap, DofSetsAreClosures) {
  const PolyMesh mesh = generate_voronoi_2d(200, 4);
  const DofMap dofs(mesh, 2);
  Partition p = partition_geometric(mesh, {2, 2, 1});
  grow_overlap(p, mesh, dofs, 2);
  for (int s = 0; s < p.num_subdomains; ++s) {
    std::set<int> closure;
    for (int c : p.overlap_cells[s]) {
      for (int g : dofs.cell_dofs(c)) {
        if (dofs.free_index(g) >= 0) {
          closure.insert(dofs.free_index(g));
        }
      }
    }
    EXPECT_EQ(p.overlap_dofs[s], std::vector<int>(closure.begin(), closure.end()));
    EXPECT_TRUE(std::includes(p.overlap_dofs[s].begin(), p.overlap_dofs[s].end(), p.nonoverlap_dofs[s].begin(),
                              p.nonoverlap_dofs[s].end()));
  }
}

class StructuredClassification : public ::testing::TestWithParam<std::tuple<int, int>> {};

// n_s^d blocks of 5^d cells: (n_s-1)^3 vertices, 3 n_s (n_s-1)^2 edges,
// 3 n_s^2 (n_s-1) faces in 3D; (n_s-1)^2 vertices, 2 n_s (n_s-1) edges in 2D.
TEST_P(StructuredClassification, ClosedFormCounts) {
  const auto [dim, ns] = GetParam();
  const PolyMesh mesh = generate_structured_box(dim, 5 * ns);
  for (int k : {1, 2}) {
    if (dim == 3 && ns > 4 && k == 2) {
      continue;
    }
    const DofMap dofs(mesh, k);
    Partition p = partition_geometric(mesh, {ns, ns, ns});
    assign_dofs(p, dofs);
    const InterfaceClassification ic = classify_interface(p, dofs);
    const std::size_t m = static_cast<std::size_t>(ns);
    if (dim == 3) {
      EXPECT_EQ(ic.count(ComponentType::Vertex), (m - 1) * (m - 1) * (m - 1));
      EXPECT_EQ(ic.count(ComponentType::Edge), 3 * m * (m - 1) * (m - 1));
      EXPECT_EQ(ic.count(ComponentType::Face), 3 * m * m * (m - 1));
    } else {
      EXPECT_EQ(ic.count(ComponentType::Vertex), (m - 1) * (m - 1));
      EXPECT_EQ(ic.count(ComponentType::Edge), 2 * m * (m - 1));
      EXPECT_EQ(ic.count(ComponentType::Face), 0u);
    }
    check_classification_invariants(p, dofs, ic);
  }
}

INSTANTIATE_TEST_SUITE_P(Grids, StructuredClassification,
                         ::testing::Values(std::tuple{2, 2}, std::tuple{2, 5}, std::tuple{3, 2}, std::tuple{3, 3},
                                           std::tuple{3, 4}, std::tuple{3, 6}));

TEST(Classification, VertexAdjacencyOnStructuredGrid) {
  // 4^3 blocks: a face has 4, 2 or 1 free corner vertices (36/72/36 faces),
  // an edge 2 or 1 (54/54).
  const PolyMesh mesh = generate_structured_box(3, 20);
  const DofMap dofs(mesh, 1);
  Partition p = partition_geometric(mesh, {4, 4, 4});
  assign_dofs(p, dofs);
  const InterfaceClassification ic = classify_interface(p, dofs);
  std::map<std::pair<ComponentType, std::size_t>, int> histogram;
  for (std::size_t c = 0; c < ic.components.size(); ++c) {
    if (ic.components[c].type != ComponentType::Vertex) {
      ++histogram[{ic.components[c].type, ic.adjacent_vertices[c].size()}];
      for (int v : ic.adjacent_vertices[c]) {
        const auto& vs = ic.components[v].sharing;
        EXPECT_TRUE(std::includes(vs.begin(), vs.end(), ic.components[c].sharing.begin(),
                                  ic.components[c].sharing.end()));
      }
    }
  }
  EXPECT_EQ((histogram[{ComponentType::Face, 4}]), 36);
  EXPECT_EQ((histogram[{ComponentType::Face, 2}]), 72);
  EXPECT_EQ((histogram[{ComponentType::Face, 1}]), 36);
  EXPECT_EQ((histogram[{ComponentType::Edge, 2}]), 54);
  EXPECT_EQ((histogram[{ComponentType::Edge, 1}]), 54);
}

TEST(Classification, TwoSubdomainsSingleEdge) {
  const PolyMesh mesh = generate_structured_box(2, 8);
  const DofMap dofs(mesh, 2);
  Partition p = partition_geometric(mesh, {2, 1, 1});
  assign_dofs(p, dofs);
  const InterfaceClassification ic = classify_interface(p, dofs);
  ASSERT_EQ(ic.components.size(), 1u);
  EXPECT_EQ(ic.components[0].type, ComponentType::Edge);
  EXPECT_EQ(ic.components[0].dofs.size(), 7u + 8u); // interior vertices plus edge moments on x = 1/2
  EXPECT_TRUE(ic.adjacent_vertices[0].empty());
}

TEST(Classification, VoronoiInvariants) {
  const PolyMesh mesh = generate_voronoi_2d(2000, 5);
  for (int k : {1, 2}) {
    const DofMap dofs(mesh, k);
    Partition p = partition_geometric(mesh, {4, 4, 1});
    assign_dofs(p, dofs);
    check_classification_invariants(p, dofs, classify_interface(p, dofs));
  }
}

TEST(Classification, InvariantUnderSubdomainRenumbering) {
  const PolyMesh mesh = generate_voronoi_2d(1500, 8);
  const DofMap dofs(mesh, 2);
  Partition p = partition_geometric(mesh, {3, 4, 1});
  assign_dofs(p, dofs);
  const auto reference = component_signature(classify_interface(p, dofs));
  std::vector<int> perm(p.num_subdomains);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(1);
  for (int trial = 0; trial < 3; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> labels(mesh.num_cells());
    for (std::size_t c = 0; c < labels.size(); ++c) {
      labels[c] = perm[p.cell_subdomain[c]];
    }
    Partition q = partition_from_labels(mesh, labels);
    assign_dofs(q, dofs);
    EXPECT_EQ(component_signature(classify_interface(q, dofs)), reference);
  }
}

TEST(Classification, SingleSubdomainHasNoInterface) {
  const PolyMesh mesh = generate_structured_box(3, 4);
  const DofMap dofs(mesh, 1);
  Partition p = partition_geometric(mesh, {1, 1, 1});
  assign_dofs(p, dofs);
  EXPECT_TRUE(p.interface_dofs.empty());
  EXPECT_EQ(static_cast<int>(p.interior_dofs.size()), dofs.num_free());
  EXPECT_TRUE(classify_interface(p, dofs).components.empty());
}
