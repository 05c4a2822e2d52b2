#include "vemdd/coarse.hpp"

#include "vemdd/error.hpp"
#include "vemdd/mesh_io.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace vemdd {

const char* to_string(CoarseKind kind) {
  switch (kind) {
  case CoarseKind::GDSW:
    return "GDSW";
  case CoarseKind::GDSWStar:
    return "GDSW*";
  case CoarseKind::RGDSW:
    return "RGDSW";
  }
  return "?";
}

CoarseKind parse_coarse_kind(const std::string& name) {
  std::string s;
  for (char c : name) {
    s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (s == "gdsw") {
    return CoarseKind::GDSW;
  }
  if (s == "gdsw*" || s == "gdswstar" || s == "gdsw-star") {
    return CoarseKind::GDSWStar;
  }
  if (s == "rgdsw") {
    return CoarseKind::RGDSW;
  }
  throw ConfigError("unknown coarse space '" + name + "' (expected gdsw, gdsw*, rgdsw)");
}

CoarseBasis interface_values(CoarseKind kind, const InterfaceClassification& cl, const DofMap& dofs,
                             OrphanPolicy orphans) {
  CoarseBasis basis;
  basis.kind = kind;
  const int ncomp = static_cast<int>(cl.components.size());
  auto spreads = [kind](ComponentType t) {
    switch (kind) {
    case CoarseKind::GDSW:
      return false;
    case CoarseKind::GDSWStar:
      return t == ComponentType::Edge;
    case CoarseKind::RGDSW:
      return t != ComponentType::Vertex;
    }
    return false;
  };

  // Columns in component order: vertices, non-spread components and promoted orphans.
  std::vector<int> column_of(ncomp, -1);
  for (int c = 0; c < ncomp; ++c) {
    const auto& comp = cl.components[c];
    bool own = !spreads(comp.type);
    if (!own && cl.adjacent_vertices[c].empty()) {
      if (orphans == OrphanPolicy::Error) {
        throw OrphanComponentError(static_cast<std::size_t>(c));
      }
      basis.promoted_orphans.push_back(c);
      own = true;
    }
    if (own) {
      column_of[c] = static_cast<int>(basis.provenance.size());
      basis.provenance.push_back({c});
    }
  }

  std::vector<Triplet> t;
  for (int c = 0; c < ncomp; ++c) {
    const auto& comp = cl.components[c];
    auto add = [&](int col, double weight) {
      for (int i : comp.dofs) {
        const double one = constant_one_dof_value(dofs.entity(dofs.global_index(i)).kind);
        t.push_back({i, col, weight * one});
      }
    };
    if (column_of[c] >= 0) {
      add(column_of[c], 1.0);
      continue;
    }
    const auto& adj = cl.adjacent_vertices[c];
    const double w = 1.0 / static_cast<double>(adj.size());
    for (int v : adj) {
      add(column_of[v], w);
      basis.provenance[column_of[v]].push_back(c);
    }
  }
  basis.phi = SparseMatrix::from_triplets(dofs.num_free(), static_cast<int>(basis.provenance.size()), std::move(t));
  return basis;
}

SparseMatrix harmonic_extension(const SparseMatrix& k, const Partition& partition, const SparseMatrix& phi_interface) {
  const int n = k.rows();
  if (phi_interface.rows() != n || static_cast<int>(partition.dof_sharing.size()) != n) {
    throw ShapeError("harmonic_extension: Phi, K and the partition disagree on the number of free DOFs");
  }
  std::vector<std::vector<int>> interior(partition.num_subdomains);
  for (int i : partition.interior_dofs) {
    interior[partition.dof_sharing[i][0]].push_back(i);
  }
  std::vector<char> is_interface(n, 0);
  for (int i : partition.interface_dofs) {
    is_interface[i] = 1;
  }

  std::vector<Triplet> t;
  {
    const auto rp = phi_interface.row_ptr();
    const auto ci = phi_interface.col_idx();
    const auto v = phi_interface.values();
    for (int i : partition.interface_dofs) {
      for (int p = rp[i]; p < rp[i + 1]; ++p) {
        t.push_back({i, ci[p], v[p]});
      }
    }
  }

  const auto krp = k.row_ptr();
  const auto kci = k.col_idx();
  const auto kv = k.values();
  const auto prp = phi_interface.row_ptr();
  const auto pci = phi_interface.col_idx();
  const auto pv = phi_interface.values();
  std::vector<int> local_col(phi_interface.cols(), -1);
  for (int s = 0; s < partition.num_subdomains; ++s) {
    const auto& idx = interior[s];
    if (idx.empty()) {
      continue;
    }
    std::vector<int> cols;
    for (int i : idx) {
      for (int p = krp[i]; p < krp[i + 1]; ++p) {
        const int j = kci[p];
        if (!is_interface[j]) {
          continue;
        }
        for (int q = prp[j]; q < prp[j + 1]; ++q) {
          if (local_col[pci[q]] < 0) {
            local_col[pci[q]] = static_cast<int>(cols.size());
            cols.push_back(pci[q]);
          }
        }
      }
    }
    if (cols.empty()) {
      continue;
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const int i = idx[r];
      for (int p = krp[i]; p < krp[i + 1]; ++p) {
        const int j = kci[p];
        if (!is_interface[j]) {
          continue;
        }
        for (int q = prp[j]; q < prp[j + 1]; ++q) {
          rhs(static_cast<Eigen::Index>(r), local_col[pci[q]]) -= kv[p] * pv[q];
        }
      }
    }
    Eigen::MatrixXd sol;
    try {
      const Factorization f = Factorization::factorize(k.submatrix(idx, idx));
      sol = f.solve(rhs);
    } catch (const Error& e) {
      throw SingularMatrixError("harmonic extension, subdomain " + std::to_string(s) + ": " + e.what());
    }
    for (std::size_t r = 0; r < idx.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const double val = sol(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        if (val != 0.0) {
          t.push_back({idx[r], cols[c], val});
        }
      }
    }
    for (int c : cols) {
      local_col[c] = -1;
    }
  }
  return SparseMatrix::from_triplets(n, phi_interface.cols(), std::move(t));
}

CoarseBasis build_coarse_basis(CoarseKind kind, const SparseMatrix& k, const Partition& partition,
                               const InterfaceClassification& classification, const DofMap& dofs,
                               OrphanPolicy orphans) {
  CoarseBasis basis = interface_values(kind, classification, dofs, orphans);
  basis.phi = harmonic_extension(k, partition, basis.phi);
  return basis;
}

CoarseOperator build_coarse_operator(const SparseMatrix& k, const SparseMatrix& phi) {
  CoarseOperator op;
  op.k0 = triple_product(phi, k);
  op.k0.set_symmetric_flag(true);
  try {
    op.factor = Factorization::factorize(op.k0);
  } catch (const Error& e) {
    const Eigen::MatrixXd dense = op.k0.to_dense();
    std::string suspects;
    const double dmax = dense.diagonal().cwiseAbs().maxCoeff();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dense);
    qr.setThreshold(1e-12);
    const auto perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < dense.cols(); ++j) {
      suspects += (suspects.empty() ? "" : ", ") + std::to_string(perm(j));
    }
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (!(dense(j, j) > 1e-14 * dmax)) {
        suspects += (suspects.empty() ? "" : ", ") + std::to_string(j);
      }
    }
    throw SingularMatrixError(std::string("coarse operator is rank deficient (") + e.what() +
                              "); suspect columns: " + (suspects.empty() ? "none identified" : suspects));
  }
  return op;
}

void export_basis_vtk(const PolyMesh& mesh, const DofMap& dofs, const CoarseBasis& basis,
                      const std::vector<int>& columns, const std::filesystem::path& path) {
  const SparseMatrix pt = basis.phi.transpose();
  VtkFields fields;
  for (int col : columns) {
    if (col < 0 || col >= basis.size()) {
      throw ShapeError("export_basis_vtk: column " + std::to_string(col) + " out of range");
    }
    std::vector<double> values(mesh.num_vertices(), 0.0);
    const auto rp = pt.row_ptr();
    const auto ci = pt.col_idx();
    const auto v = pt.values();
    for (int p = rp[col]; p < rp[col + 1]; ++p) {
      const int g = dofs.global_index(ci[p]);
      if (dofs.entity(g).kind == EntityKind::Vertex) {
        values[dofs.entity(g).index] = v[p];
      }
    }
    fields.point_scalars.emplace_back("phi_" + std::to_string(col), std::move(values));
  }
  export_mesh(mesh, path, MeshFormat::Vtk, fields);
}

} // namespace vemdd
