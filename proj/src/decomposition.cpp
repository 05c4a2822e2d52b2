#include "vemdd/decomposition.hpp"

#include "vemdd/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <string>

namespace vemdd {

namespace {

Partition from_cell_map(std::vector<int> labels, int n) {
  Partition p;
  p.num_subdomains = n;
  p.subdomain_cells.assign(n, {});
  for (std::size_t c = 0; c < labels.size(); ++c) {
    p.subdomain_cells[labels[c]].push_back(static_cast<int>(c));
  }
  p.cell_subdomain = std::move(labels);
  return p;
}

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Union-find with path halving.
struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent[std::max(a, b)] = std::min(a, b);
    }
  }
};

} // namespace

Partition partition_geometric(const PolyMesh& mesh, std::array<int, 3> grid) {
  const int dim = mesh.dim();
  if (dim == 2) {
    grid[2] = 1;
  }
  for (int d = 0; d < dim; ++d) {
    if (grid[d] < 1) {
      throw PartitionError("partition grid dimensions must be >= 1");
    }
  }
  const auto box = mesh.bounding_box();
  const int n = grid[0] * grid[1] * grid[2];
  std::vector<int> labels(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Point x = cell_centroid(mesh, c);
    std::array<int, 3> idx{0, 0, 0};
    for (int d = 0; d < dim; ++d) {
      const double extent = box[1][d] - box[0][d];
      const double t = extent > 0.0 ? (x[d] - box[0][d]) / extent * grid[d] : 0.0;
      idx[d] = std::clamp(static_cast<int>(std::ceil(t)) - 1, 0, grid[d] - 1);
    }
    labels[c] = idx[0] + grid[0] * (idx[1] + grid[1] * idx[2]);
  }
  Partition p = from_cell_map(std::move(labels), n);
  std::string empty;
  for (int s = 0; s < n; ++s) {
    if (p.subdomain_cells[s].empty()) {
      const int i = s % grid[0];
      const int j = (s / grid[0]) % grid[1];
      const int k = s / (grid[0] * grid[1]);
      empty += (empty.empty() ? "" : ", ") + std::string("(") + std::to_string(i) + "," + std::to_string(j) +
               (dim == 3 ? "," + std::to_string(k) : "") + ")";
    }
  }
  if (!empty.empty()) {
    throw PartitionError("empty subdomain boxes: " + empty);
  }
  return p;
}

std::vector<std::vector<int>> facet_adjacency(const PolyMesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.num_cells());
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    const auto& cells = mesh.facet_cells(f);
    for (std::size_t a = 0; a < cells.size(); ++a) {
      for (std::size_t b = 0; b < cells.size(); ++b) {
        if (a != b) {
          adj[cells[a]].push_back(cells[b]);
        }
      }
    }
  }
  for (auto& a : adj) {
    sort_unique(a);
  }
  return adj;
}

Partition partition_graph_growing(const PolyMesh& mesh, int n) {
  const int nc = static_cast<int>(mesh.num_cells());
  if (n < 1 || n > nc) {
    throw PartitionError("graph growing needs 1 <= n <= number of cells");
  }
  const auto adj = facet_adjacency(mesh);
  std::vector<int> labels(nc, -1);
  int assigned = 0;
  for (int s = 0; s < n; ++s) {
    const int target = (nc - assigned) / (n - s);
    // Seed next to the pieces grown so far, so the remainder stays compact.
    int seed = -1;
    for (int c = 0; c < nc && seed < 0; ++c) {
      if (labels[c] < 0 && (assigned == 0 || std::any_of(adj[c].begin(), adj[c].end(),
                                                          [&](int d) { return labels[d] >= 0; }))) {
        seed = c;
      }
    }
    for (int c = 0; c < nc && seed < 0; ++c) {
      if (labels[c] < 0) {
        seed = c;
      }
    }
    std::queue<int> q;
    q.push(seed);
    labels[seed] = s;
    int size = 1;
    while (!q.empty() && size < target) {
      const int c = q.front();
      q.pop();
      for (int d : adj[c]) {
        if (labels[d] < 0 && size < target) {
          labels[d] = s;
          ++size;
          q.push(d);
        }
      }
    }
    assigned += size;
  }

  // Keep the largest connected part of each piece; the rest is released.
  std::vector<int> part(nc, -1);
  std::vector<int> best_part(n, -1);
  std::vector<int> best_size(n, 0);
  int parts = 0;
  for (int c = 0; c < nc; ++c) {
    if (labels[c] < 0 || part[c] >= 0) {
      continue;
    }
    int size = 0;
    std::queue<int> q;
    q.push(c);
    part[c] = parts;
    while (!q.empty()) {
      const int x = q.front();
      q.pop();
      ++size;
      for (int d : adj[x]) {
        if (labels[d] == labels[c] && part[d] < 0) {
          part[d] = parts;
          q.push(d);
        }
      }
    }
    if (size > best_size[labels[c]]) {
      best_size[labels[c]] = size;
      best_part[labels[c]] = parts;
    }
    ++parts;
  }
  for (int c = 0; c < nc; ++c) {
    if (labels[c] >= 0 && part[c] != best_part[labels[c]]) {
      labels[c] = -1;
    }
  }
  // Released cells join the smallest adjacent piece, one layer at a time.
  std::vector<int> sizes(n, 0);
  for (int l : labels) {
    if (l >= 0) {
      ++sizes[l];
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<int> next = labels;
    for (int c = 0; c < nc; ++c) {
      if (labels[c] >= 0) {
        continue;
      }
      int pick = -1;
      for (int d : adj[c]) {
        if (labels[d] >= 0 && (pick < 0 || sizes[labels[d]] < sizes[pick] ||
                               (sizes[labels[d]] == sizes[pick] && labels[d] < pick))) {
          pick = labels[d];
        }
      }
      if (pick >= 0) {
        next[c] = pick;
        changed = true;
      }
    }
    for (int c = 0; c < nc; ++c) {
      if (labels[c] < 0 && next[c] >= 0) {
        ++sizes[next[c]];
      }
    }
    labels = std::move(next);
  }
  if (std::find(labels.begin(), labels.end(), -1) != labels.end()) {
    throw PartitionError("graph growing needs a facet-connected mesh");
  }
  return from_cell_map(std::move(labels), n);
}

Partition partition_from_labels(const PolyMesh& mesh, std::vector<int> labels) {
  if (labels.size() != mesh.num_cells()) {
    throw PartitionError("one label per cell required");
  }
  int n = 0;
  for (int l : labels) {
    if (l < 0) {
      throw PartitionError("negative subdomain label");
    }
    n = std::max(n, l + 1);
  }
  Partition p = from_cell_map(std::move(labels), n);
  for (int s = 0; s < n; ++s) {
    if (p.subdomain_cells[s].empty()) {
      throw PartitionError("subdomain " + std::to_string(s) + " has no cells");
    }
  }
  return p;
}

void assign_dofs(Partition& p, const DofMap& dofs) {
  const int nfree = dofs.num_free();
  p.dof_sharing.assign(nfree, {});
  p.nonoverlap_dofs.assign(p.num_subdomains, {});
  for (std::size_t c = 0; c < p.cell_subdomain.size(); ++c) {
    const int s = p.cell_subdomain[c];
    for (int d : dofs.cell_dofs(static_cast<int>(c))) {
      const int i = dofs.free_index(d);
      if (i < 0) {
        continue;
      }
      auto& sh = p.dof_sharing[i];
      if (std::find(sh.begin(), sh.end(), s) == sh.end()) {
        sh.push_back(s);
      }
    }
  }
  p.interior_dofs.clear();
  p.interface_dofs.clear();
  for (int i = 0; i < nfree; ++i) {
    auto& sh = p.dof_sharing[i];
    std::sort(sh.begin(), sh.end());
    for (int s : sh) {
      p.nonoverlap_dofs[s].push_back(i);
    }
    (sh.size() >= 2 ? p.interface_dofs : p.interior_dofs).push_back(i);
  }
}

void grow_overlap(Partition& p, const PolyMesh& mesh, const DofMap& dofs, int levels) {
  if (levels < 0) {
    throw PartitionError("overlap levels must be nonnegative");
  }
  if (p.dof_sharing.size() != static_cast<std::size_t>(dofs.num_free())) {
    assign_dofs(p, dofs);
  }
  const auto adj = facet_adjacency(mesh);
  p.overlap_levels = levels;
  p.overlap_cells.assign(p.num_subdomains, {});
  p.overlap_dofs.assign(p.num_subdomains, {});
  std::vector<int> mark(mesh.num_cells(), -1);
  for (int s = 0; s < p.num_subdomains; ++s) {
    std::vector<int> cells = p.subdomain_cells[s];
    for (int c : cells) {
      mark[c] = s;
    }
    std::vector<int> frontier = cells;
    for (int l = 0; l < levels; ++l) {
      std::vector<int> next;
      for (int c : frontier) {
        for (int d : adj[c]) {
          if (mark[d] != s) {
            mark[d] = s;
            next.push_back(d);
          }
        }
      }
      cells.insert(cells.end(), next.begin(), next.end());
      frontier = std::move(next);
    }
    std::sort(cells.begin(), cells.end());
    auto& od = p.overlap_dofs[s];
    for (int c : cells) {
      for (int d : dofs.cell_dofs(c)) {
        if (const int i = dofs.free_index(d); i >= 0) {
          od.push_back(i);
        }
      }
    }
    sort_unique(od);
    p.overlap_cells[s] = std::move(cells);
  }
}

const char* to_string(ComponentType type) {
  switch (type) {
  case ComponentType::Vertex:
    return "vertex";
  case ComponentType::Edge:
    return "edge";
  case ComponentType::Face:
    return "face";
  }
  return "?";
}

std::size_t InterfaceClassification::count(ComponentType type) const {
  return static_cast<std::size_t>(
      std::count_if(components.begin(), components.end(), [type](const auto& c) { return c.type == type; }));
}

InterfaceClassification classify_interface(const Partition& p, const DofMap& dofs) {
  const int nfree = dofs.num_free();
  if (p.dof_sharing.size() != static_cast<std::size_t>(nfree)) {
    throw PartitionError("classify_interface: DOF sharing sets not computed");
  }
  const PolyMesh& mesh = dofs.mesh();
  const int nc = static_cast<int>(mesh.num_cells());

  // Sharing-set ids for interface DOFs.
  std::map<std::vector<int>, int> set_ids;
  std::vector<int> set_of(nfree, -1);
  for (int i : p.interface_dofs) {
    set_of[i] = set_ids.try_emplace(p.dof_sharing[i], static_cast<int>(set_ids.size())).first->second;
  }

  // Connectivity: DOFs with the same sharing set that lie in a common cell closure.
  std::vector<std::vector<int>> cell_iface(nc);
  DisjointSets ds(nfree);
  for (int c = 0; c < nc; ++c) {
    auto& list = cell_iface[c];
    for (int d : dofs.cell_dofs(c)) {
      if (const int i = dofs.free_index(d); i >= 0 && set_of[i] >= 0) {
        list.push_back(i);
      }
    }
    for (std::size_t a = 0; a < list.size(); ++a) {
      for (std::size_t b = a + 1; b < list.size(); ++b) {
        if (set_of[list[a]] == set_of[list[b]]) {
          ds.unite(list[a], list[b]);
        }
      }
    }
  }

  InterfaceClassification out;
  out.dof_component.assign(nfree, -1);
  std::vector<int> root_component(nfree, -1);
  for (int i : p.interface_dofs) {
    const int r = ds.find(i);
    if (root_component[r] < 0) {
      root_component[r] = static_cast<int>(out.components.size());
      out.components.push_back({ComponentType::Edge, {}, p.dof_sharing[i]});
    }
    out.dof_component[i] = root_component[r];
    out.components[root_component[r]].dofs.push_back(i);
  }
  for (auto& comp : out.components) {
    const std::size_t mult = comp.sharing.size();
    if (mult < 2) {
      throw PartitionError("interface DOF with multiplicity below 2");
    }
    if (mesh.dim() == 2) {
      comp.type = mult >= 3 ? ComponentType::Vertex : ComponentType::Edge;
    } else if (mult == 2) {
      comp.type = ComponentType::Face;
    } else {
      comp.type = comp.dofs.size() == 1 ? ComponentType::Vertex : ComponentType::Edge;
    }
  }

  // Vertex adjacency through common cells.
  const int ncomp = static_cast<int>(out.components.size());
  out.adjacent_vertices.assign(ncomp, {});
  for (int c = 0; c < nc; ++c) {
    std::vector<int> comps;
    for (int i : cell_iface[c]) {
      comps.push_back(out.dof_component[i]);
    }
    sort_unique(comps);
    for (int v : comps) {
      if (out.components[v].type != ComponentType::Vertex) {
        continue;
      }
      const auto& vs = out.components[v].sharing;
      for (int other : comps) {
        const auto& os = out.components[other].sharing;
        if (out.components[other].type != ComponentType::Vertex &&
            std::includes(vs.begin(), vs.end(), os.begin(), os.end())) {
          out.adjacent_vertices[other].push_back(v);
        }
      }
    }
  }
  for (auto& a : out.adjacent_vertices) {
    sort_unique(a);
  }
  return out;
}

} // namespace vemdd
