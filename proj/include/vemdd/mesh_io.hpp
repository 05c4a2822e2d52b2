#pragma once

#include "vemdd/mesh.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace vemdd {

enum class MeshFormat {
  Vtk,    ///< legacy VTK unstructured grid, ASCII
  Native, ///< plain-text polymesh format (see docs/mesh_format.md)
};

/// Picks the format from the extension: ".vtk" is VTK, anything else native.
[[nodiscard]] MeshFormat format_from_path(const std::filesystem::path& path);

/// Optional per-point and per-cell fields written alongside a VTK mesh.
struct VtkFields {
  std::vector<std::pair<std::string, std::vector<double>>> point_scalars;
  std::vector<std::pair<std::string, std::vector<int>>> cell_labels;
};

void export_mesh(const PolyMesh& mesh, const std::filesystem::path& path, MeshFormat format,
                 const VtkFields& fields = {});

/// Reads a mesh. Malformed input raises ParseError with the offending line;
/// dangling indices and (when `validate` is set) any violated mesh invariant
/// raise ValidationError.
[[nodiscard]] PolyMesh import_mesh(const std::filesystem::path& path, MeshFormat format, bool validate = true);

/// Same, from in-memory text.
[[nodiscard]] PolyMesh parse_mesh(const std::string& text, MeshFormat format, bool validate = true);
[[nodiscard]] std::string write_mesh(const PolyMesh& mesh, MeshFormat format, const VtkFields& fields = {});

} // namespace vemdd
