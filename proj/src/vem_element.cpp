#include "vem_internal.hpp"

#include "vemdd/error.hpp"
#include "vemdd/geometry.hpp"
#include "vemdd/vem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace vemdd {

// ---------------------------------------------------------------------------
// Quadrature helpers

namespace detail {

quadrature::PointSet polygon_quadrature(const std::vector<Eigen::Vector2d>& vertices, int degree) {
  const auto& ref = quadrature::reference_triangle(quadrature::points_for_degree(degree));
  const std::size_t n = vertices.size();
  Eigen::Vector2d apex = Eigen::Vector2d::Zero();
  for (const auto& v : vertices) {
    apex += v;
  }
  apex /= static_cast<double>(n);
  const Eigen::Index nq = ref.weights.size();
  quadrature::PointSet qs;
  qs.points.resize(static_cast<Eigen::Index>(n) * nq, 2);
  qs.weights.resize(static_cast<Eigen::Index>(n) * nq);
  for (std::size_t j = 0; j < n; ++j) {
    const Eigen::Vector2d e1 = vertices[j] - apex;
    const Eigen::Vector2d e2 = vertices[(j + 1) % n] - apex;
    const double jac = e1.x() * e2.y() - e1.y() * e2.x();
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Eigen::Index row = static_cast<Eigen::Index>(j) * nq + q;
      qs.points.row(row) = (apex + ref.points(q, 0) * e1 + ref.points(q, 1) * e2).transpose();
      qs.weights(row) = ref.weights(q) * jac;
    }
  }
  return qs;
}

FaceFrame face_frame(const PolyMesh& mesh, int face) {
  const auto& loop = mesh.face(face);
  FaceFrame fr;
  fr.origin = to_vec(face_centroid(mesh, face));
  fr.normal = to_vec(face_normal(mesh, face));
  Eigen::Vector3d t = to_vec(mesh.vertex(loop[1])) - to_vec(mesh.vertex(loop[0]));
  t -= t.dot(fr.normal) * fr.normal;
  fr.t1 = t.normalized();
  fr.t2 = fr.normal.cross(fr.t1);
  fr.local.reserve(loop.size());
  for (int v : loop) {
    const Eigen::Vector3d p = to_vec(mesh.vertex(v)) - fr.origin;
    fr.local.emplace_back(p.dot(fr.t1), p.dot(fr.t2));
  }
  return fr;
}

quadrature::PointSet face_quadrature(const PolyMesh& mesh, int face, int degree) {
  const FaceFrame fr = face_frame(mesh, face);
  const auto local = polygon_quadrature(fr.local, degree);
  quadrature::PointSet qs;
  qs.points.resize(local.size(), 3);
  qs.weights = local.weights;
  for (Eigen::Index q = 0; q < local.size(); ++q) {
    qs.points.row(q) = fr.to_global(local.points.row(q).transpose()).transpose();
  }
  return qs;
}

quadrature::PointSet edge_quadrature(const PolyMesh& mesh, int edge, int degree) {
  const auto rule = quadrature::gauss_legendre(quadrature::points_for_degree(degree));
  const auto& e = mesh.edge(edge);
  const Eigen::Vector3d a = to_vec(mesh.vertex(e[0]));
  const Eigen::Vector3d b = to_vec(mesh.vertex(e[1]));
  const double len = (b - a).norm();
  quadrature::PointSet qs;
  const auto nq = static_cast<Eigen::Index>(rule.points.size());
  qs.points.resize(nq, 3);
  qs.weights.resize(nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    qs.points.row(q) = (a + rule.points[q] * (b - a)).transpose();
    qs.weights(q) = rule.weights[q] * len;
  }
  return qs;
}

} // namespace detail

CellQuadrature cell_quadrature(const PolyMesh& mesh, int cell, int degree) {
  const int npd = quadrature::points_for_degree(degree);
  CellQuadrature cq;
  if (mesh.dim() == 2) {
    std::vector<Eigen::Vector2d> verts;
    for (int v : mesh.cell(cell)) {
      verts.emplace_back(mesh.vertex(v)[0], mesh.vertex(v)[1]);
    }
    const auto qs = detail::polygon_quadrature(verts, degree);
    cq.points = Eigen::MatrixXd::Zero(qs.size(), 3);
    cq.points.leftCols(2) = qs.points;
    cq.weights = qs.weights;
    return cq;
  }
  const auto& ref = quadrature::reference_tetrahedron(npd);
  const Eigen::Index nq = ref.weights.size();
  const auto& verts = mesh.cell_vertices(cell);
  Eigen::Vector3d apex = Eigen::Vector3d::Zero();
  for (int v : verts) {
    apex += to_vec(mesh.vertex(v));
  }
  apex /= static_cast<double>(verts.size());
  const auto& fl = mesh.cell(cell);
  const auto& sign = mesh.cell_face_orientation(cell);
  std::size_t ntets = 0;
  for (int f : fl) {
    ntets += mesh.face(f).size();
  }
  cq.points.resize(static_cast<Eigen::Index>(ntets) * nq, 3);
  cq.weights.resize(static_cast<Eigen::Index>(ntets) * nq);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < fl.size(); ++i) {
    const auto& loop = mesh.face(fl[i]);
    Eigen::Vector3d fc = Eigen::Vector3d::Zero();
    for (int v : loop) {
      fc += to_vec(mesh.vertex(v));
    }
    fc /= static_cast<double>(loop.size());
    for (std::size_t j = 0; j < loop.size(); ++j) {
      const Eigen::Vector3d e1 = fc - apex;
      const Eigen::Vector3d e2 = to_vec(mesh.vertex(loop[j])) - apex;
      const Eigen::Vector3d e3 = to_vec(mesh.vertex(loop[(j + 1) % loop.size()])) - apex;
      const double jac = sign[i] * e1.dot(e2.cross(e3));
      for (Eigen::Index q = 0; q < nq; ++q, ++row) {
        cq.points.row(row) = (apex + ref.points(q, 0) * e1 + ref.points(q, 1) * e2 + ref.points(q, 2) * e3).transpose();
        cq.weights(row) = ref.weights(q) * jac;
      }
    }
  }
  return cq;
}

// ---------------------------------------------------------------------------
// Scaled monomials

ScaledMonomials::ScaledMonomials(int dim, int k, const Eigen::Vector3d& center, double diameter)
    : dim_(dim), k_(k), center_(center), h_(diameter) {
  for (int deg = 0; deg <= k; ++deg) {
    if (dim == 2) {
      for (int i = deg; i >= 0; --i) {
        exponents_.push_back({i, deg - i, 0});
      }
    } else {
      for (int i = deg; i >= 0; --i) {
        for (int j = deg - i; j >= 0; --j) {
          exponents_.push_back({i, j, deg - i - j});
        }
      }
    }
  }
}

int ScaledMonomials::degree(int a) const { return exponents_[a][0] + exponents_[a][1] + exponents_[a][2]; }

namespace {
double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) {
    r *= x;
  }
  return r;
}
} // namespace

Eigen::VectorXd ScaledMonomials::values(const Eigen::Vector3d& x) const {
  const Eigen::Vector3d s = (x - center_) / h_;
  Eigen::VectorXd v(size());
  for (int a = 0; a < size(); ++a) {
    const auto& e = exponents_[a];
    v(a) = ipow(s.x(), e[0]) * ipow(s.y(), e[1]) * ipow(s.z(), e[2]);
  }
  return v;
}

Eigen::MatrixXd ScaledMonomials::gradients(const Eigen::Vector3d& x) const {
  const Eigen::Vector3d s = (x - center_) / h_;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(size(), dim_);
  for (int a = 0; a < size(); ++a) {
    const auto& e = exponents_[a];
    for (int d = 0; d < dim_; ++d) {
      if (e[d] == 0) {
        continue;
      }
      double val = e[d] / h_;
      for (int dd = 0; dd < 3; ++dd) {
        val *= ipow(s(dd), dd == d ? e[dd] - 1 : e[dd]);
      }
      g(a, d) = val;
    }
  }
  return g;
}

Eigen::VectorXd ScaledMonomials::laplacians(const Eigen::Vector3d& x) const {
  const Eigen::Vector3d s = (x - center_) / h_;
  Eigen::VectorXd l = Eigen::VectorXd::Zero(size());
  for (int a = 0; a < size(); ++a) {
    const auto& e = exponents_[a];
    for (int d = 0; d < dim_; ++d) {
      if (e[d] < 2) {
        continue;
      }
      double val = e[d] * (e[d] - 1) / (h_ * h_);
      for (int dd = 0; dd < 3; ++dd) {
        val *= ipow(s(dd), dd == d ? e[dd] - 2 : e[dd]);
      }
      l(a) += val;
    }
  }
  return l;
}

// ---------------------------------------------------------------------------
// Projectors

namespace {

void check_order(int k) {
  if (k != 1 && k != 2) {
    throw UnsupportedOrderError(k);
  }
}

// Shared tail: G = B D, Pi_nabla*, H, Pi_0* (enhanced-space moments of degree
// k-1 and k are taken from Pi_nabla).
void finish_projectors(ElementProjectors& p, const ScaledMonomials& mono, const Eigen::MatrixXd& qpoints,
                       const Eigen::VectorXd& qweights, int mean_dof, long cell_id) {
  const int np = mono.size();
  p.G = p.B * p.D;
  if (np > 1) {
    Eigen::LLT<Eigen::MatrixXd> gram(p.G.bottomRightCorner(np - 1, np - 1));
    if (gram.info() != Eigen::Success) {
      throw AssemblyError("gradient Gram block of the projector is not positive definite", cell_id);
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(p.G);
  if (!(lu.rcond() > 1e-14)) {
    throw AssemblyError("projector system is numerically singular", cell_id);
  }
  p.pi_nabla_star = lu.solve(p.B);

  p.H = Eigen::MatrixXd::Zero(np, np);
  for (Eigen::Index q = 0; q < qweights.size(); ++q) {
    const Eigen::VectorXd m = mono.values(qpoints.row(q).transpose());
    p.H.noalias() += qweights(q) * m * m.transpose();
  }
  Eigen::MatrixXd C = p.H * p.pi_nabla_star;
  const int low = polynomial_dimension(mono.dim(), p.k - 2);
  for (int a = 0; a < low; ++a) {
    C.row(a).setZero();
    C(a, mean_dof) = p.measure; // only alpha = 0 occurs for k <= 2
  }
  p.pi_zero_star = p.H.llt().solve(C);
}

} // namespace

ElementProjectors polygon_projectors(const std::vector<Eigen::Vector2d>& vertices, int k, long cell_id) {
  check_order(k);
  const int n = static_cast<int>(vertices.size());
  if (n < 3) {
    throw AssemblyError("polygon with fewer than 3 vertices", cell_id);
  }
  ElementProjectors p;
  p.k = k;
  double area = 0.0;
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  double diam = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = vertices[i];
    const Eigen::Vector2d& b = vertices[(i + 1) % n];
    const double c = a.x() * b.y() - b.x() * a.y();
    area += 0.5 * c;
    acc += c * (a + b) / 6.0;
    for (int j = i + 1; j < n; ++j) {
      diam = std::max(diam, (vertices[i] - vertices[j]).norm());
    }
  }
  if (!(area > 1e-14 * diam * diam)) {
    throw AssemblyError("polygon has non-positive area", cell_id);
  }
  p.measure = area;
  p.centroid = Eigen::Vector3d(acc.x() / area, acc.y() / area, 0.0);
  p.diameter = diam;
  const ScaledMonomials mono(2, k, p.centroid, diam);
  const int np = mono.size();
  const int ndof = n * k + (k == 2 ? 1 : 0);
  const int mean_dof = 2 * n; // valid for k = 2 only

  const auto quad = detail::polygon_quadrature(vertices, 2 * k);
  Eigen::MatrixXd qpoints = Eigen::MatrixXd::Zero(quad.size(), 3);
  qpoints.leftCols(2) = quad.points;

  auto lift = [](const Eigen::Vector2d& v) { return Eigen::Vector3d(v.x(), v.y(), 0.0); };

  p.D = Eigen::MatrixXd::Zero(ndof, np);
  for (int i = 0; i < n; ++i) {
    p.D.row(i) = mono.values(lift(vertices[i])).transpose();
  }
  const auto gl = quadrature::gauss_legendre(k + 1);
  if (k == 2) {
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d& a = vertices[i];
      const Eigen::Vector2d& b = vertices[(i + 1) % n];
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(np);
      for (std::size_t q = 0; q < gl.points.size(); ++q) {
        mean += gl.weights[q] * mono.values(lift(a + gl.points[q] * (b - a)));
      }
      p.D.row(n + i) = mean.transpose();
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(np);
    for (Eigen::Index q = 0; q < quad.size(); ++q) {
      mean += quad.weights(q) * mono.values(qpoints.row(q).transpose());
    }
    p.D.row(mean_dof) = (mean / area).transpose();
  }

  p.B = Eigen::MatrixXd::Zero(np, ndof);
  if (k == 1) {
    p.B.row(0).head(n).setConstant(1.0 / n);
  } else {
    p.B(0, mean_dof) = 1.0;
  }
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = vertices[i];
    const Eigen::Vector2d& b = vertices[(i + 1) % n];
    const double len = (b - a).norm();
    const Eigen::Vector2d t = (b - a) / len;
    const Eigen::Vector2d nrm(t.y(), -t.x());
    const int ia = i;
    const int ib = (i + 1) % n;
    for (std::size_t q = 0; q < gl.points.size(); ++q) {
      const double s = gl.points[q];
      const Eigen::VectorXd dn = mono.gradients(lift(a + s * (b - a))) * nrm;
      const double w = len * gl.weights[q];
      if (k == 1) {
        p.B.col(ia).tail(np - 1) += w * (1.0 - s) * dn.tail(np - 1);
        p.B.col(ib).tail(np - 1) += w * s * dn.tail(np - 1);
      } else {
        const double bubble = s * (1.0 - s);
        p.B.col(ia).tail(np - 1) += w * ((1.0 - s) - 3.0 * bubble) * dn.tail(np - 1);
        p.B.col(ib).tail(np - 1) += w * (s - 3.0 * bubble) * dn.tail(np - 1);
        p.B.col(n + i).tail(np - 1) += w * 6.0 * bubble * dn.tail(np - 1);
      }
    }
  }
  if (k == 2) {
    const Eigen::VectorXd lap = mono.laplacians(p.centroid);
    p.B.col(mean_dof).tail(np - 1) -= area * lap.tail(np - 1);
  }
  finish_projectors(p, mono, qpoints, quad.weights, mean_dof, cell_id);
  return p;
}

namespace {

ElementProjectors polyhedron_projectors(const PolyMesh& mesh, int cell, int k) {
  const auto& cv = mesh.cell_vertices(cell);
  const auto& ce = mesh.cell_edges(cell);
  const auto& fl = mesh.cell(cell);
  const auto& sign = mesh.cell_face_orientation(cell);
  if (std::any_of(sign.begin(), sign.end(), [](int s) { return s == 0; })) {
    throw AssemblyError("cell surface is not closed and orientable", cell);
  }
  const int nv = static_cast<int>(cv.size());
  const int ne = static_cast<int>(ce.size());
  const int nf = static_cast<int>(fl.size());
  const int ndof = k == 1 ? nv : nv + ne + nf + 1;
  const int edge_off = nv;
  const int face_off = nv + ne;
  const int mean_dof = nv + ne + nf;
  auto local_vertex = [&cv](int v) { return static_cast<int>(std::lower_bound(cv.begin(), cv.end(), v) - cv.begin()); };
  auto local_edge = [&ce](int e) { return static_cast<int>(std::lower_bound(ce.begin(), ce.end(), e) - ce.begin()); };

  ElementProjectors p;
  p.k = k;
  const CellQuadrature quad = cell_quadrature(mesh, cell, 2 * k);
  p.measure = quad.weights.sum();
  p.diameter = cell_diameter(mesh, cell);
  if (!(p.measure > 1e-14 * std::pow(p.diameter, 3))) {
    throw AssemblyError("polyhedron has non-positive volume", cell);
  }
  p.centroid = (quad.points.transpose() * quad.weights) / p.measure;
  const ScaledMonomials mono(3, k, p.centroid, p.diameter);
  const int np = mono.size();

  p.D = Eigen::MatrixXd::Zero(ndof, np);
  p.B = Eigen::MatrixXd::Zero(np, ndof);
  for (int i = 0; i < nv; ++i) {
    p.D.row(i) = mono.values(to_vec(mesh.vertex(cv[i]))).transpose();
  }
  if (k == 2) {
    for (int i = 0; i < ne; ++i) {
      const auto eq = detail::edge_quadrature(mesh, ce[i], 2);
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(np);
      for (Eigen::Index q = 0; q < eq.size(); ++q) {
        mean += eq.weights(q) * mono.values(eq.points.row(q).transpose());
      }
      p.D.row(edge_off + i) = (mean / eq.weights.sum()).transpose();
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(np);
    for (Eigen::Index q = 0; q < quad.weights.size(); ++q) {
      mean += quad.weights(q) * mono.values(quad.points.row(q).transpose());
    }
    p.D.row(mean_dof) = (mean / p.measure).transpose();
    p.B(0, mean_dof) = 1.0;
    const Eigen::VectorXd lap = mono.laplacians(p.centroid);
    p.B.col(mean_dof).tail(np - 1) -= p.measure * lap.tail(np - 1);
  } else {
    p.B.row(0).head(nv).setConstant(1.0 / nv);
  }

  // Boundary terms: int_F (grad m . n) v = int_F (grad m . n) Pi0_F v, exact
  // in the enhanced face space because grad m . n has degree k-1.
  for (int i = 0; i < nf; ++i) {
    const int f = fl[i];
    const auto& loop = mesh.face(f);
    const auto& fe = mesh.face_edges(f);
    const int nfv = static_cast<int>(loop.size());
    const detail::FaceFrame fr = detail::face_frame(mesh, f);
    const ElementProjectors fp = polygon_projectors(fr.local, k, cell);
    const ScaledMonomials fmono(2, k, fp.centroid, fp.diameter);
    std::vector<int> map(fp.num_dofs());
    for (int j = 0; j < nfv; ++j) {
      map[j] = local_vertex(loop[j]);
      if (k == 2) {
        map[nfv + j] = edge_off + local_edge(fe[j]);
      }
    }
    if (k == 2) {
      map[2 * nfv] = face_off + i;
    }
    const Eigen::Vector3d outward = sign[i] * fr.normal;
    const auto fq = detail::polygon_quadrature(fr.local, 2 * k);
    Eigen::VectorXd face_mean = Eigen::VectorXd::Zero(np);
    for (Eigen::Index q = 0; q < fq.size(); ++q) {
      const Eigen::Vector2d xi = fq.points.row(q).transpose();
      const Eigen::Vector3d x = fr.to_global(xi);
      const Eigen::RowVectorXd pi0 = fmono.values(Eigen::Vector3d(xi.x(), xi.y(), 0.0)).transpose() * fp.pi_zero_star;
      const Eigen::VectorXd dn = mono.gradients(x) * outward;
      for (int j = 0; j < fp.num_dofs(); ++j) {
        p.B.col(map[j]).tail(np - 1) += fq.weights(q) * pi0(j) * dn.tail(np - 1);
      }
      if (k == 2) {
        face_mean += fq.weights(q) * mono.values(x);
      }
    }
    if (k == 2) {
      p.D.row(face_off + i) = (face_mean / fq.weights.sum()).transpose();
    }
  }
  finish_projectors(p, mono, quad.points, quad.weights, mean_dof, cell);
  return p;
}

} // namespace

ElementProjectors compute_projectors(const PolyMesh& mesh, int cell, int k) {
  check_order(k);
  if (mesh.dim() == 2) {
    std::vector<Eigen::Vector2d> verts;
    for (int v : mesh.cell(cell)) {
      verts.emplace_back(mesh.vertex(v)[0], mesh.vertex(v)[1]);
    }
    return polygon_projectors(verts, k, cell);
  }
  return polyhedron_projectors(mesh, cell, k);
}

ElementOperators element_operators(const PolyMesh& mesh, int cell, int k, Stabilization stab, const ScalarField& f) {
  ElementOperators op;
  op.cell = cell;
  op.projectors = compute_projectors(mesh, cell, k);
  const auto& p = op.projectors;
  const int ndof = p.num_dofs();
  Eigen::MatrixXd g_tilde = p.G;
  g_tilde.row(0).setZero();
  op.consistency = p.pi_nabla_star.transpose() * g_tilde * p.pi_nabla_star;
  op.consistency = 0.5 * (op.consistency + op.consistency.transpose()).eval();

  const double scale = mesh.dim() == 2 ? 1.0 : p.diameter;
  Eigen::VectorXd s(ndof);
  for (int i = 0; i < ndof; ++i) {
    s(i) = stab == Stabilization::DRecipe ? std::max(op.consistency(i, i), scale) : scale;
  }
  const Eigen::MatrixXd ipi = Eigen::MatrixXd::Identity(ndof, ndof) - p.pi_nabla();
  op.stabilization = ipi.transpose() * s.asDiagonal() * ipi;
  op.stabilization = 0.5 * (op.stabilization + op.stabilization.transpose()).eval();
  op.stiffness = op.consistency + op.stabilization;

  if (f) {
    const CellQuadrature quad = cell_quadrature(mesh, cell, k + 3);
    const ScaledMonomials mono(mesh.dim(), k, p.centroid, p.diameter);
    Eigen::VectorXd fm = Eigen::VectorXd::Zero(mono.size());
    for (Eigen::Index q = 0; q < quad.weights.size(); ++q) {
      const Eigen::Vector3d x = quad.points.row(q).transpose();
      fm += quad.weights(q) * f(to_point(x)) * mono.values(x);
    }
    op.load = p.pi_zero_star.transpose() * fm;
  }
  return op;
}

} // namespace vemdd
