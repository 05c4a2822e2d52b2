#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace vemdd {

using Point = std::array<double, 3>;

/// Polygonal (2D) or polyhedral (3D) mesh of an axis-aligned box.
///
/// Primary connectivity is what a file carries: vertex coordinates plus
/// vertex loops per cell (2D), or vertex loops per face and face lists per
/// cell (3D). Edges, facet-to-cell incidence, per-cell face orientation and
/// boundary flags are derived on construction in a deterministic order, so
/// two meshes built from identical primary data are identical.
///
/// A constructed mesh is immutable.
class PolyMesh {
public:
  PolyMesh() = default;

  /// 2D mesh from vertex loops. Loops may be given in either orientation;
  /// they are stored as given (validation flags clockwise loops).
  static PolyMesh from_polygons(std::vector<Point> vertices, std::vector<std::vector<int>> cell_loops);

  /// 3D mesh from planar face loops and cells as face-index lists.
  /// Throws ValidationError naming the face or cell when an index is out of
  /// range or a face has fewer than 3 vertices.
  static PolyMesh from_polyhedra(std::vector<Point> vertices, std::vector<std::vector<int>> face_loops,
                                 std::vector<std::vector<int>> cell_faces);

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t num_vertices() const noexcept { return vertices_.size(); }
  [[nodiscard]] std::size_t num_edges() const noexcept { return edges_.size(); }
  [[nodiscard]] std::size_t num_faces() const noexcept { return faces_.size(); }
  [[nodiscard]] std::size_t num_cells() const noexcept { return cells_.size(); }

  [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
  [[nodiscard]] const Point& vertex(std::size_t v) const { return vertices_[v]; }
  [[nodiscard]] const std::array<int, 2>& edge(std::size_t e) const { return edges_[e]; }
  [[nodiscard]] const std::vector<std::array<int, 2>>& edges() const noexcept { return edges_; }

  /// 3D: vertex loop of a face.
  [[nodiscard]] const std::vector<int>& face(std::size_t f) const { return faces_[f]; }
  [[nodiscard]] const std::vector<std::vector<int>>& faces() const noexcept { return faces_; }
  /// 3D: edge i of the face joins face(f)[i] and face(f)[i+1].
  [[nodiscard]] const std::vector<int>& face_edges(std::size_t f) const { return face_edges_[f]; }

  /// 2D: vertex loop; 3D: face indices.
  [[nodiscard]] const std::vector<int>& cell(std::size_t c) const { return cells_[c]; }
  [[nodiscard]] const std::vector<std::vector<int>>& cells() const noexcept { return cells_; }
  /// Distinct vertices of a cell (2D: the loop; 3D: ascending order).
  [[nodiscard]] const std::vector<int>& cell_vertices(std::size_t c) const { return cell_vertices_[c]; }
  /// Distinct edges of a cell (2D: edge i joins loop[i] and loop[i+1]; 3D: ascending order).
  [[nodiscard]] const std::vector<int>& cell_edges(std::size_t c) const { return cell_edges_[c]; }
  /// 3D: +1 if the stored loop of cell(c)[i] is oriented outward from c, -1 otherwise,
  /// 0 if the cell surface could not be oriented consistently.
  [[nodiscard]] const std::vector<int>& cell_face_orientation(std::size_t c) const { return cell_face_sign_[c]; }

  /// Codimension-1 entities: edges in 2D, faces in 3D.
  [[nodiscard]] std::size_t num_facets() const noexcept { return dim_ == 2 ? edges_.size() : faces_.size(); }
  [[nodiscard]] const std::vector<int>& facet_cells(std::size_t f) const { return facet_cells_[f]; }
  [[nodiscard]] std::vector<int> cell_facets(std::size_t c) const { return dim_ == 2 ? cell_edges_[c] : cells_[c]; }

  /// Topological boundary: facets with a single adjacent cell, and the
  /// edges/vertices in their closure.
  [[nodiscard]] bool vertex_on_boundary(std::size_t v) const { return vertex_boundary_[v] != 0; }
  [[nodiscard]] bool edge_on_boundary(std::size_t e) const { return edge_boundary_[e] != 0; }
  [[nodiscard]] bool face_on_boundary(std::size_t f) const { return face_boundary_[f] != 0; }

  /// Axis-aligned bounding box of the vertices.
  [[nodiscard]] std::array<Point, 2> bounding_box() const;

private:
  void build_topology();

  int dim_ = 0;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::vector<int>> faces_;
  std::vector<std::vector<int>> face_edges_;
  std::vector<std::vector<int>> cells_;
  std::vector<std::vector<int>> cell_vertices_;
  std::vector<std::vector<int>> cell_edges_;
  std::vector<std::vector<int>> cell_face_sign_;
  std::vector<std::vector<int>> facet_cells_;
  std::vector<std::uint8_t> vertex_boundary_;
  std::vector<std::uint8_t> edge_boundary_;
  std::vector<std::uint8_t> face_boundary_;
};

// Geometry queries. 3D cell quantities use the outward face orientation.

/// Signed area of a 2D cell (positive for counter-clockwise loops).
[[nodiscard]] double signed_area_2d(const PolyMesh& mesh, std::size_t cell);
/// Area (2D) or volume (3D) of a cell, signed by orientation.
[[nodiscard]] double cell_measure(const PolyMesh& mesh, std::size_t cell);
[[nodiscard]] Point cell_centroid(const PolyMesh& mesh, std::size_t cell);
[[nodiscard]] double cell_diameter(const PolyMesh& mesh, std::size_t cell);
[[nodiscard]] double face_area(const PolyMesh& mesh, std::size_t face);
/// Unit normal of the stored face loop (Newell's method).
[[nodiscard]] Point face_normal(const PolyMesh& mesh, std::size_t face);
[[nodiscard]] Point face_centroid(const PolyMesh& mesh, std::size_t face);
[[nodiscard]] double edge_length(const PolyMesh& mesh, std::size_t edge);

/// One violated mesh invariant.
struct MeshViolation {
  enum class Kind {
    Orientation,      ///< clockwise 2D loop or inward 3D surface
    NonPositiveMeasure,
    SelfIntersection,
    MeasureSum,
    FacetIncidence,   ///< interior facet not shared by 2 cells, boundary facet not by 1
    NonPlanarFace,
    OpenSurface,      ///< 3D cell surface not closed / not orientable
    DegenerateEntity, ///< repeated vertex in a loop, zero-length edge
  };
  Kind kind;
  std::vector<long> entities;
  std::string message;
};

struct MeshReport {
  std::vector<MeshViolation> violations;

  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
  [[nodiscard]] std::size_t count(MeshViolation::Kind kind) const;
};

[[nodiscard]] const char* to_string(MeshViolation::Kind kind);

/// Checks every mesh invariant and lists each violation with entity indices.
[[nodiscard]] MeshReport validate_mesh(const PolyMesh& mesh);

/// Relative planarity tolerance for 3D faces (times the face diameter).
inline constexpr double kPlanarityTolerance = 1e-9;
/// Tolerance on the sum of cell measures against the bounding-box measure.
inline constexpr double kMeasureSumTolerance = 1e-10;

} // namespace vemdd
