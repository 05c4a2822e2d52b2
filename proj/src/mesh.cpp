#include "vemdd/mesh.hpp"

#include "vemdd/error.hpp"
#include "vemdd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

namespace vemdd {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

class EdgeTable {
public:
  int get_or_add(int a, int b, std::vector<std::array<int, 2>>& edges) {
    const auto [it, inserted] = ids_.try_emplace(edge_key(a, b), static_cast<int>(edges.size()));
    if (inserted) {
      edges.push_back({std::min(a, b), std::max(a, b)});
    }
    return it->second;
  }

private:
  std::unordered_map<std::uint64_t, int> ids_;
};

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Signed volume of a closed surface, faces oriented by `signs`.
double signed_volume(const PolyMesh& mesh, std::size_t c, const std::vector<int>& signs) {
  const auto& verts = mesh.cell_vertices(c);
  Vec3 apex = Vec3::Zero();
  for (int v : verts) {
    apex += to_vec(mesh.vertex(v));
  }
  apex /= static_cast<double>(verts.size());
  double vol = 0.0;
  const auto& fl = mesh.cell(c);
  for (std::size_t i = 0; i < fl.size(); ++i) {
    const auto& loop = mesh.face(fl[i]);
    Vec3 fc = Vec3::Zero();
    for (int v : loop) {
      fc += to_vec(mesh.vertex(v));
    }
    fc /= static_cast<double>(loop.size());
    double fv = 0.0;
    for (std::size_t j = 0; j < loop.size(); ++j) {
      const Vec3 a = to_vec(mesh.vertex(loop[j])) - apex;
      const Vec3 b = to_vec(mesh.vertex(loop[(j + 1) % loop.size()])) - apex;
      fv += (fc - apex).dot(a.cross(b));
    }
    vol += signs[i] * fv / 6.0;
  }
  return vol;
}

} // namespace

PolyMesh PolyMesh::from_polygons(std::vector<Point> vertices, std::vector<std::vector<int>> cell_loops) {
  const auto nv = static_cast<long>(vertices.size());
  for (std::size_t c = 0; c < cell_loops.size(); ++c) {
    if (cell_loops[c].size() < 3) {
      throw ValidationError("cell " + std::to_string(c) + " has fewer than 3 vertices");
    }
    for (int v : cell_loops[c]) {
      if (v < 0 || v >= nv) {
        throw ValidationError("cell " + std::to_string(c) + " references missing vertex " + std::to_string(v));
      }
    }
  }
  PolyMesh m;
  m.dim_ = 2;
  m.vertices_ = std::move(vertices);
  m.cells_ = std::move(cell_loops);
  m.build_topology();
  return m;
}

PolyMesh PolyMesh::from_polyhedra(std::vector<Point> vertices, std::vector<std::vector<int>> face_loops,
                                  std::vector<std::vector<int>> cell_faces) {
  const auto nv = static_cast<long>(vertices.size());
  const auto nf = static_cast<long>(face_loops.size());
  for (std::size_t f = 0; f < face_loops.size(); ++f) {
    if (face_loops[f].size() < 3) {
      throw ValidationError("face " + std::to_string(f) + " has fewer than 3 vertices");
    }
    for (int v : face_loops[f]) {
      if (v < 0 || v >= nv) {
        throw ValidationError("face " + std::to_string(f) + " references missing vertex " + std::to_string(v));
      }
    }
  }
  for (std::size_t c = 0; c < cell_faces.size(); ++c) {
    if (cell_faces[c].size() < 4) {
      throw ValidationError("cell " + std::to_string(c) + " has fewer than 4 faces");
    }
    for (int f : cell_faces[c]) {
      if (f < 0 || f >= nf) {
        throw ValidationError("cell " + std::to_string(c) + " references missing face " + std::to_string(f));
      }
    }
  }
  PolyMesh m;
  m.dim_ = 3;
  m.vertices_ = std::move(vertices);
  m.faces_ = std::move(face_loops);
  m.cells_ = std::move(cell_faces);
  m.build_topology();
  return m;
}

void PolyMesh::build_topology() {
  EdgeTable table;
  vertex_boundary_.assign(vertices_.size(), 0);
  if (dim_ == 2) {
    cell_vertices_ = cells_;
    cell_edges_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const auto& loop = cells_[c];
      cell_edges_[c].resize(loop.size());
      for (std::size_t i = 0; i < loop.size(); ++i) {
        cell_edges_[c][i] = table.get_or_add(loop[i], loop[(i + 1) % loop.size()], edges_);
      }
    }
    facet_cells_.assign(edges_.size(), {});
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      auto ce = cell_edges_[c];
      sort_unique(ce);
      for (int e : ce) {
        facet_cells_[e].push_back(static_cast<int>(c));
      }
    }
    edge_boundary_.assign(edges_.size(), 0);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      if (facet_cells_[e].size() == 1) {
        edge_boundary_[e] = 1;
        vertex_boundary_[edges_[e][0]] = 1;
        vertex_boundary_[edges_[e][1]] = 1;
      }
    }
    return;
  }

  face_edges_.resize(faces_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const auto& loop = faces_[f];
    face_edges_[f].resize(loop.size());
    for (std::size_t i = 0; i < loop.size(); ++i) {
      face_edges_[f][i] = table.get_or_add(loop[i], loop[(i + 1) % loop.size()], edges_);
    }
  }
  facet_cells_.assign(faces_.size(), {});
  cell_vertices_.resize(cells_.size());
  cell_edges_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    auto cf = cells_[c];
    sort_unique(cf);
    for (int f : cf) {
      facet_cells_[f].push_back(static_cast<int>(c));
    }
    for (int f : cells_[c]) {
      cell_vertices_[c].insert(cell_vertices_[c].end(), faces_[f].begin(), faces_[f].end());
      cell_edges_[c].insert(cell_edges_[c].end(), face_edges_[f].begin(), face_edges_[f].end());
    }
    sort_unique(cell_vertices_[c]);
    sort_unique(cell_edges_[c]);
  }
  face_boundary_.assign(faces_.size(), 0);
  edge_boundary_.assign(edges_.size(), 0);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    if (facet_cells_[f].size() == 1) {
      face_boundary_[f] = 1;
      for (int e : face_edges_[f]) {
        edge_boundary_[e] = 1;
      }
      for (int v : faces_[f]) {
        vertex_boundary_[v] = 1;
      }
    }
  }

  // Orient each cell surface: faces sharing an edge must traverse it in
  // opposite directions; the global sign makes the volume positive.
  cell_face_sign_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& fl = cells_[c];
    const std::size_t n = fl.size();
    std::unordered_map<int, std::vector<std::pair<std::size_t, int>>> uses; // edge -> (local face, dir)
    for (std::size_t i = 0; i < n; ++i) {
      const auto& loop = faces_[fl[i]];
      for (std::size_t j = 0; j < loop.size(); ++j) {
        const int a = loop[j];
        const int b = loop[(j + 1) % loop.size()];
        uses[face_edges_[fl[i]][j]].emplace_back(i, a < b ? 1 : -1);
      }
    }
    std::vector<int> sign(n, 0);
    bool consistent = true;
    for (const auto& [e, u] : uses) {
      if (u.size() != 2 || u[0].first == u[1].first) {
        consistent = false;
      }
    }
    if (consistent) {
      sign[0] = 1;
      std::queue<std::size_t> queue;
      queue.push(0);
      while (!queue.empty() && consistent) {
        const std::size_t i = queue.front();
        queue.pop();
        for (int e : face_edges_[fl[i]]) {
          const auto& u = uses[e];
          const auto& self = u[0].first == i ? u[0] : u[1];
          const auto& other = u[0].first == i ? u[1] : u[0];
          const int want = -sign[i] * self.second * other.second;
          if (sign[other.first] == 0) {
            sign[other.first] = want;
            queue.push(other.first);
          } else if (sign[other.first] != want) {
            consistent = false;
            break;
          }
        }
      }
      consistent = consistent && std::all_of(sign.begin(), sign.end(), [](int s) { return s != 0; });
    }
    if (!consistent) {
      cell_face_sign_[c].assign(n, 0);
      continue;
    }
    cell_face_sign_[c] = sign;
    if (signed_volume(*this, c, sign) < 0.0) {
      for (int& s : cell_face_sign_[c]) {
        s = -s;
      }
    }
  }
}

std::array<Point, 2> PolyMesh::bounding_box() const {
  const double inf = std::numeric_limits<double>::infinity();
  Point lo{inf, inf, inf};
  Point hi{-inf, -inf, -inf};
  for (const auto& p : vertices_) {
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
  if (vertices_.empty()) {
    lo = hi = Point{0, 0, 0};
  }
  return {lo, hi};
}

double signed_area_2d(const PolyMesh& mesh, std::size_t cell) {
  const auto& loop = mesh.cell(cell);
  const Point& o = mesh.vertex(loop[0]);
  double a = 0.0;
  for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
    const Point& p = mesh.vertex(loop[i]);
    const Point& q = mesh.vertex(loop[i + 1]);
    a += (p[0] - o[0]) * (q[1] - o[1]) - (q[0] - o[0]) * (p[1] - o[1]);
  }
  return 0.5 * a;
}

double cell_measure(const PolyMesh& mesh, std::size_t cell) {
  if (mesh.dim() == 2) {
    return signed_area_2d(mesh, cell);
  }
  return signed_volume(mesh, cell, mesh.cell_face_orientation(cell));
}

Point cell_centroid(const PolyMesh& mesh, std::size_t cell) {
  if (mesh.dim() == 2) {
    const auto& loop = mesh.cell(cell);
    const Point& o = mesh.vertex(loop[0]);
    double a = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
      const Point& p = mesh.vertex(loop[i]);
      const Point& q = mesh.vertex(loop[i + 1]);
      const double t = 0.5 * ((p[0] - o[0]) * (q[1] - o[1]) - (q[0] - o[0]) * (p[1] - o[1]));
      a += t;
      cx += t * (o[0] + p[0] + q[0]) / 3.0;
      cy += t * (o[1] + p[1] + q[1]) / 3.0;
    }
    return {cx / a, cy / a, 0.0};
  }
  const auto& verts = mesh.cell_vertices(cell);
  Vec3 apex = Vec3::Zero();
  for (int v : verts) {
    apex += to_vec(mesh.vertex(v));
  }
  apex /= static_cast<double>(verts.size());
  const auto& fl = mesh.cell(cell);
  const auto& sign = mesh.cell_face_orientation(cell);
  double vol = 0.0;
  Vec3 acc = Vec3::Zero();
  for (std::size_t i = 0; i < fl.size(); ++i) {
    const auto& loop = mesh.face(fl[i]);
    Vec3 fc = Vec3::Zero();
    for (int v : loop) {
      fc += to_vec(mesh.vertex(v));
    }
    fc /= static_cast<double>(loop.size());
    for (std::size_t j = 0; j < loop.size(); ++j) {
      const Vec3 a = to_vec(mesh.vertex(loop[j]));
      const Vec3 b = to_vec(mesh.vertex(loop[(j + 1) % loop.size()]));
      const double t = sign[i] * (fc - apex).dot((a - apex).cross(b - apex)) / 6.0;
      vol += t;
      acc += t * (apex + fc + a + b) / 4.0;
    }
  }
  return to_point(acc / vol);
}

double cell_diameter(const PolyMesh& mesh, std::size_t cell) {
  const auto& verts = mesh.cell_vertices(cell);
  double d2 = 0.0;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    for (std::size_t j = i + 1; j < verts.size(); ++j) {
      d2 = std::max(d2, (to_vec(mesh.vertex(verts[i])) - to_vec(mesh.vertex(verts[j]))).squaredNorm());
    }
  }
  return std::sqrt(d2);
}

namespace {
Vec3 newell(const PolyMesh& mesh, std::size_t face) {
  const auto& loop = mesh.face(face);
  Vec3 n = Vec3::Zero();
  const Vec3 o = to_vec(mesh.vertex(loop[0]));
  for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
    n += (to_vec(mesh.vertex(loop[i])) - o).cross(to_vec(mesh.vertex(loop[i + 1])) - o);
  }
  return n;
}
} // namespace

double face_area(const PolyMesh& mesh, std::size_t face) { return 0.5 * newell(mesh, face).norm(); }

Point face_normal(const PolyMesh& mesh, std::size_t face) { return to_point(newell(mesh, face).normalized()); }

Point face_centroid(const PolyMesh& mesh, std::size_t face) {
  const auto& loop = mesh.face(face);
  const Vec3 n = newell(mesh, face).normalized();
  const Vec3 o = to_vec(mesh.vertex(loop[0]));
  double a = 0.0;
  Vec3 acc = Vec3::Zero();
  for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
    const Vec3 p = to_vec(mesh.vertex(loop[i]));
    const Vec3 q = to_vec(mesh.vertex(loop[i + 1]));
    const double t = 0.5 * n.dot((p - o).cross(q - o));
    a += t;
    acc += t * (o + p + q) / 3.0;
  }
  return to_point(acc / a);
}

double edge_length(const PolyMesh& mesh, std::size_t edge) {
  const auto& e = mesh.edge(edge);
  return (to_vec(mesh.vertex(e[0])) - to_vec(mesh.vertex(e[1]))).norm();
}

// ---------------------------------------------------------------------------
// Validation

std::size_t MeshReport::count(MeshViolation::Kind kind) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [kind](const MeshViolation& v) { return v.kind == kind; }));
}

const char* to_string(MeshViolation::Kind kind) {
  switch (kind) {
  case MeshViolation::Kind::Orientation: return "orientation";
  case MeshViolation::Kind::NonPositiveMeasure: return "non-positive-measure";
  case MeshViolation::Kind::SelfIntersection: return "self-intersection";
  case MeshViolation::Kind::MeasureSum: return "measure-sum";
  case MeshViolation::Kind::FacetIncidence: return "facet-incidence";
  case MeshViolation::Kind::NonPlanarFace: return "non-planar-face";
  case MeshViolation::Kind::OpenSurface: return "open-surface";
  case MeshViolation::Kind::DegenerateEntity: return "degenerate-entity";
  }
  return "unknown";
}

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Closed-segment intersection test with a relative tolerance.
bool segments_touch(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2, double tol) {
  const double d1 = cross2(q2 - q1, p1 - q1);
  const double d2 = cross2(q2 - q1, p2 - q1);
  const double d3 = cross2(p2 - p1, q1 - p1);
  const double d4 = cross2(p2 - p1, q2 - p1);
  if (((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))) {
    return true;
  }
  auto on_segment = [tol](const Vec2& a, const Vec2& b, const Vec2& p, double d) {
    return std::abs(d) <= tol && p.x() >= std::min(a.x(), b.x()) - tol && p.x() <= std::max(a.x(), b.x()) + tol &&
           p.y() >= std::min(a.y(), b.y()) - tol && p.y() <= std::max(a.y(), b.y()) + tol;
  };
  return on_segment(q1, q2, p1, d1) || on_segment(q1, q2, p2, d2) || on_segment(p1, p2, q1, d3) ||
         on_segment(p1, p2, q2, d4);
}

bool polygon_is_simple(const std::vector<Vec2>& pts) {
  const std::size_t n = pts.size();
  double scale = 0.0;
  for (const auto& p : pts) {
    scale = std::max(scale, (p - pts[0]).norm());
  }
  const double tol = 1e-12 * scale * scale;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        continue;
      }
      if (segments_touch(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n], tol)) {
        return false;
      }
    }
  }
  return true;
}

bool has_repeated(const std::vector<int>& loop) {
  auto s = loop;
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

} // namespace

MeshReport validate_mesh(const PolyMesh& mesh) {
  using Kind = MeshViolation::Kind;
  MeshReport report;
  auto add = [&report](Kind kind, std::vector<long> ids, std::string msg) {
    report.violations.push_back({kind, std::move(ids), std::move(msg)});
  };
  const auto box = mesh.bounding_box();
  double extent = 0.0;
  for (int d = 0; d < mesh.dim(); ++d) {
    extent = std::max(extent, box[1][d] - box[0][d]);
  }
  const double geo_tol = 1e-12 * std::max(extent, 1.0);

  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (edge_length(mesh, e) <= geo_tol) {
      add(Kind::DegenerateEntity, {static_cast<long>(e)}, "zero-length edge");
    }
  }

  double total = 0.0;
  if (mesh.dim() == 2) {
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const auto& loop = mesh.cell(c);
      const auto id = static_cast<long>(c);
      if (has_repeated(loop)) {
        add(Kind::DegenerateEntity, {id}, "repeated vertex in cell loop");
      }
      const double a = signed_area_2d(mesh, c);
      total += a;
      if (a < 0.0) {
        add(Kind::Orientation, {id}, "clockwise cell loop");
      } else if (a == 0.0) {
        add(Kind::NonPositiveMeasure, {id}, "zero-area cell");
      }
      std::vector<Vec2> pts;
      for (int v : loop) {
        pts.emplace_back(mesh.vertex(v)[0], mesh.vertex(v)[1]);
      }
      if (!polygon_is_simple(pts)) {
        add(Kind::SelfIntersection, {id}, "self-intersecting cell loop");
      }
    }
  } else {
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
      const auto& loop = mesh.face(f);
      const auto id = static_cast<long>(f);
      if (has_repeated(loop)) {
        add(Kind::DegenerateEntity, {id}, "repeated vertex in face loop");
        continue;
      }
      const Vec3 n = to_vec(face_normal(mesh, f));
      const Vec3 c = to_vec(face_centroid(mesh, f));
      double diam = 0.0;
      double dev = 0.0;
      for (int v : loop) {
        const Vec3 p = to_vec(mesh.vertex(v));
        dev = std::max(dev, std::abs(n.dot(p - c)));
        for (int w : loop) {
          diam = std::max(diam, (p - to_vec(mesh.vertex(w))).norm());
        }
      }
      if (!(dev <= kPlanarityTolerance * diam)) {
        add(Kind::NonPlanarFace, {id}, "face deviates from its plane by " + std::to_string(dev));
        continue;
      }
      const Vec3 t1 = (to_vec(mesh.vertex(loop[1])) - to_vec(mesh.vertex(loop[0]))).normalized();
      const Vec3 t2 = n.cross(t1);
      std::vector<Vec2> pts;
      for (int v : loop) {
        const Vec3 p = to_vec(mesh.vertex(v)) - c;
        pts.emplace_back(p.dot(t1), p.dot(t2));
      }
      if (!polygon_is_simple(pts)) {
        add(Kind::SelfIntersection, {id}, "self-intersecting face loop");
      }
    }
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      const auto id = static_cast<long>(c);
      const auto& sign = mesh.cell_face_orientation(c);
      if (std::any_of(sign.begin(), sign.end(), [](int s) { return s == 0; })) {
        add(Kind::OpenSurface, {id}, "cell surface is not a closed orientable manifold");
        continue;
      }
      const double v = cell_measure(mesh, c);
      total += v;
      if (!(v > 0.0)) {
        add(Kind::NonPositiveMeasure, {id}, "non-positive cell volume");
      }
    }
  }

  double box_measure = 1.0;
  for (int d = 0; d < mesh.dim(); ++d) {
    box_measure *= box[1][d] - box[0][d];
  }
  if (mesh.num_cells() > 0 && !(std::abs(total - box_measure) <= kMeasureSumTolerance * box_measure)) {
    add(Kind::MeasureSum, {}, "cell measures sum to " + std::to_string(total) + ", box measure " +
                                  std::to_string(box_measure));
  }

  // A facet lies on the box boundary if all its vertices share one box side.
  auto facet_vertices = [&mesh](std::size_t f) -> std::vector<int> {
    if (mesh.dim() == 2) {
      return {mesh.edge(f)[0], mesh.edge(f)[1]};
    }
    return mesh.face(f);
  };
  for (std::size_t f = 0; f < mesh.num_facets(); ++f) {
    const auto verts = facet_vertices(f);
    bool on_box = false;
    for (int d = 0; d < mesh.dim() && !on_box; ++d) {
      for (int side = 0; side < 2 && !on_box; ++side) {
        on_box = std::all_of(verts.begin(), verts.end(), [&](int v) {
          return std::abs(mesh.vertex(v)[d] - box[side][d]) <= geo_tol;
        });
      }
    }
    const std::size_t ncells = mesh.facet_cells(f).size();
    const std::size_t expected = on_box ? 1 : 2;
    if (ncells != expected) {
      add(Kind::FacetIncidence, {static_cast<long>(f)},
          std::string(on_box ? "boundary" : "interior") + " facet shared by " + std::to_string(ncells) + " cells");
    }
  }
  return report;
}

} // namespace vemdd
