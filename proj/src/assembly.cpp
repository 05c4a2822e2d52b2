#include "vemdd/error.hpp"
#include "vemdd/geometry.hpp"
#include "vem_internal.hpp"

#include <algorithm>
#include <cmath>

namespace vemdd {

std::vector<double> AssembledSystem::expand(std::span<const double> free_values) const {
  if (free_values.size() != static_cast<std::size_t>(dofs->num_free())) {
    throw ShapeError("expand: expected " + std::to_string(dofs->num_free()) + " free values");
  }
  std::vector<double> u = dirichlet;
  for (int i = 0; i < dofs->num_free(); ++i) {
    u[dofs->global_index(i)] = free_values[i];
  }
  return u;
}

AssembledSystem assemble(const PolyMesh& mesh, const DofMap& dofs, const ScalarField& f, const ScalarField& g,
                         Stabilization stab) {
  const int nc = static_cast<int>(mesh.num_cells());
  const int nfree = dofs.num_free();
  AssembledSystem sys;
  sys.mesh = &mesh;
  sys.dofs = &dofs;
  sys.dirichlet.assign(dofs.num_dofs(), 0.0);
  for (int d = 0; d < dofs.num_dofs(); ++d) {
    if (dofs.is_dirichlet(d)) {
      sys.dirichlet[d] = g ? detail::interpolate_dof(dofs, d, g) : 0.0;
    }
  }

  // Sparsity pattern: row i couples with every free DOF of the cells containing i.
  std::vector<std::vector<int>> cell_dofs(nc);
  std::vector<int> count(nfree + 1, 0);
  for (int c = 0; c < nc; ++c) {
    cell_dofs[c] = dofs.cell_dofs(c);
    for (int d : cell_dofs[c]) {
      if (const int i = dofs.free_index(d); i >= 0) {
        ++count[i + 1];
      }
    }
  }
  for (int i = 0; i < nfree; ++i) {
    count[i + 1] += count[i];
  }
  std::vector<int> dof_cells(count.back());
  {
    std::vector<int> fill(count.begin(), count.end() - 1);
    for (int c = 0; c < nc; ++c) {
      for (int d : cell_dofs[c]) {
        if (const int i = dofs.free_index(d); i >= 0) {
          dof_cells[fill[i]++] = c;
        }
      }
    }
  }
  std::vector<int> row_ptr(nfree + 1, 0);
  std::vector<int> col_idx;
  std::vector<int> scratch;
  for (int i = 0; i < nfree; ++i) {
    scratch.clear();
    for (int p = count[i]; p < count[i + 1]; ++p) {
      for (int d : cell_dofs[dof_cells[p]]) {
        if (const int j = dofs.free_index(d); j >= 0) {
          scratch.push_back(j);
        }
      }
    }
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    col_idx.insert(col_idx.end(), scratch.begin(), scratch.end());
    row_ptr[i + 1] = static_cast<int>(col_idx.size());
  }
  std::vector<double> values(col_idx.size(), 0.0);
  sys.b.assign(nfree, 0.0);

  for (int c = 0; c < nc; ++c) {
    const ElementOperators op = element_operators(mesh, c, dofs.order(), stab, f);
    const auto& ld = cell_dofs[c];
    const int n = static_cast<int>(ld.size());
    if (op.stiffness.rows() != n) {
      throw AssemblyError("element DOF count does not match the DOF map", c);
    }
    for (int a = 0; a < n; ++a) {
      const int i = dofs.free_index(ld[a]);
      if (i < 0) {
        continue;
      }
      if (op.load.size() == n) {
        sys.b[i] += op.load(a);
      }
      const auto begin = col_idx.begin() + row_ptr[i];
      const auto end = col_idx.begin() + row_ptr[i + 1];
      for (int bcol = 0; bcol < n; ++bcol) {
        const int j = dofs.free_index(ld[bcol]);
        if (j < 0) {
          sys.b[i] -= op.stiffness(a, bcol) * sys.dirichlet[ld[bcol]];
          continue;
        }
        const auto it = std::lower_bound(begin, end, j);
        values[it - col_idx.begin()] += op.stiffness(a, bcol);
      }
    }
  }
  sys.K = SparseMatrix::from_csr(nfree, nfree, std::move(row_ptr), std::move(col_idx), std::move(values));
  sys.K.set_symmetric_flag(true);
  return sys;
}

ErrorNorms compute_errors(const PolyMesh& mesh, const DofMap& dofs, std::span<const double> uh, const ScalarField& u,
                          const VectorField& grad_u) {
  if (uh.size() != static_cast<std::size_t>(dofs.num_dofs())) {
    throw ShapeError("compute_errors: expected a global DOF vector");
  }
  const int k = dofs.order();
  const int dim = mesh.dim();
  double l2 = 0.0;
  double h1 = 0.0;
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const ElementProjectors p = compute_projectors(mesh, c, k);
    const auto ld = dofs.cell_dofs(c);
    Eigen::VectorXd local(static_cast<Eigen::Index>(ld.size()));
    for (std::size_t a = 0; a < ld.size(); ++a) {
      local(static_cast<Eigen::Index>(a)) = uh[ld[a]];
    }
    const Eigen::VectorXd cn = p.pi_nabla_star * local;
    const Eigen::VectorXd c0 = p.pi_zero_star * local;
    const ScaledMonomials mono(dim, k, p.centroid, p.diameter);
    const CellQuadrature q = cell_quadrature(mesh, c, 2 * k + 4);
    for (Eigen::Index i = 0; i < q.weights.size(); ++i) {
      const Eigen::Vector3d x = q.points.row(i).transpose();
      const Point pt = to_point(x);
      const double e0 = u(pt) - mono.values(x).dot(c0);
      const Eigen::VectorXd gh = mono.gradients(x).transpose() * cn;
      const Point gu = grad_u(pt);
      double e1 = 0.0;
      for (int d = 0; d < dim; ++d) {
        e1 += (gu[d] - gh(d)) * (gu[d] - gh(d));
      }
      l2 += q.weights(i) * e0 * e0;
      h1 += q.weights(i) * e1;
    }
  }
  return {std::sqrt(std::max(l2, 0.0)), std::sqrt(std::max(h1, 0.0))};
}

} // namespace vemdd
