#include "vem_internal.hpp"

#include "vemdd/error.hpp"
#include "vemdd/geometry.hpp"
#include "vemdd/vem.hpp"

#include <algorithm>

namespace vemdd {

DofMap::DofMap(const PolyMesh& mesh, int k) : mesh_(&mesh), k_(k), dim_(mesh.dim()) {
  if (k != 1 && k != 2) {
    throw UnsupportedOrderError(k);
  }
  const int nv = static_cast<int>(mesh.num_vertices());
  const int ne = static_cast<int>(mesh.num_edges());
  const int nf = dim_ == 3 ? static_cast<int>(mesh.num_faces()) : 0;
  const int nc = static_cast<int>(mesh.num_cells());
  edge_offset_ = nv;
  face_offset_ = nv + (k == 2 ? ne : 0);
  cell_offset_ = face_offset_ + (k == 2 ? nf : 0);
  const int total = cell_offset_ + (k == 2 ? nc : 0);
  entities_.reserve(total);
  global_to_free_.assign(total, -1);
  auto add = [this](EntityKind kind, int index, bool boundary) {
    const int g = static_cast<int>(entities_.size());
    entities_.push_back({kind, index});
    if (!boundary) {
      global_to_free_[g] = static_cast<int>(free_to_global_.size());
      free_to_global_.push_back(g);
    }
  };
  for (int v = 0; v < nv; ++v) {
    add(EntityKind::Vertex, v, mesh.vertex_on_boundary(v));
  }
  if (k == 2) {
    for (int e = 0; e < ne; ++e) {
      add(EntityKind::Edge, e, mesh.edge_on_boundary(e));
    }
    for (int f = 0; f < nf; ++f) {
      add(EntityKind::Face, f, mesh.face_on_boundary(f));
    }
    for (int c = 0; c < nc; ++c) {
      add(EntityKind::Cell, c, false);
    }
  }
}

std::vector<int> DofMap::cell_dofs(int c) const {
  std::vector<int> out(mesh_->cell_vertices(c).begin(), mesh_->cell_vertices(c).end());
  if (k_ == 1) {
    return out;
  }
  for (int e : mesh_->cell_edges(c)) {
    out.push_back(edge_dof(e));
  }
  if (dim_ == 3) {
    for (int f : mesh_->cell(c)) {
      out.push_back(face_dof(f));
    }
  }
  out.push_back(cell_dof(c));
  return out;
}

std::vector<int> DofMap::entity_vertices(int dof) const {
  const DofEntity& ent = entities_[dof];
  switch (ent.kind) {
  case EntityKind::Vertex:
    return {ent.index};
  case EntityKind::Edge: {
    const auto& e = mesh_->edge(ent.index);
    return {std::min(e[0], e[1]), std::max(e[0], e[1])};
  }
  case EntityKind::Face: {
    std::vector<int> v = mesh_->face(ent.index);
    std::sort(v.begin(), v.end());
    return v;
  }
  case EntityKind::Cell: {
    std::vector<int> v = mesh_->cell_vertices(ent.index);
    std::sort(v.begin(), v.end());
    return v;
  }
  }
  return {};
}

long structured_dof_count(int dim, int n, int k) {
  const long m = n;
  const long p = m + 1;
  if (dim == 2) {
    return k == 1 ? p * p : p * p + 2 * m * p + m * m;
  }
  return k == 1 ? p * p * p : p * p * p + 3 * m * p * p + 3 * m * m * p + m * m * m;
}

double constant_one_dof_value(EntityKind /*kind*/) { return 1.0; }

namespace detail {

double interpolate_dof(const DofMap& dofs, int dof, const ScalarField& u) {
  const PolyMesh& mesh = dofs.mesh();
  constexpr int kDegree = 8;
  auto mean_of = [&u](const Eigen::MatrixXd& points, const Eigen::VectorXd& weights) {
    double s = 0.0;
    for (Eigen::Index q = 0; q < weights.size(); ++q) {
      s += weights(q) * u(to_point(points.row(q).transpose()));
    }
    return s / weights.sum();
  };
  const DofEntity& ent = dofs.entity(dof);
  switch (ent.kind) {
  case EntityKind::Vertex:
    return u(mesh.vertex(ent.index));
  case EntityKind::Edge: {
    const auto qs = edge_quadrature(mesh, ent.index, kDegree);
    return mean_of(qs.points, qs.weights);
  }
  case EntityKind::Face: {
    const auto qs = face_quadrature(mesh, ent.index, kDegree);
    return mean_of(qs.points, qs.weights);
  }
  case EntityKind::Cell: {
    const CellQuadrature cq = cell_quadrature(mesh, ent.index, kDegree);
    return mean_of(cq.points, cq.weights);
  }
  }
  return 0.0;
}

} // namespace detail

std::vector<double> interpolate(const DofMap& dofs, const ScalarField& u) {
  std::vector<double> out(dofs.num_dofs());
  for (int d = 0; d < dofs.num_dofs(); ++d) {
    out[d] = detail::interpolate_dof(dofs, d, u);
  }
  return out;
}

} // namespace vemdd
