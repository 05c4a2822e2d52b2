#include "vemdd/mesh_io.hpp"

#include "vemdd/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace vemdd {

namespace {

constexpr int kVtkTriangle = 5;
constexpr int kVtkPolygon = 7;
constexpr int kVtkQuad = 9;
constexpr int kVtkTetra = 10;
constexpr int kVtkHexahedron = 12;
constexpr int kVtkPolyhedron = 42;

void append_double(std::string& out, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

class Tokens {
public:
  Tokens(const std::string& text, char comment) {
    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
      const char c = text[i];
      if (c == '\n') {
        ++line;
        ++i;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
      } else if (comment != 0 && c == comment) {
        while (i < n && text[i] != '\n') {
          ++i;
        }
      } else {
        const std::size_t start = i;
        while (i < n && text[i] != ' ' && text[i] != '\t' && text[i] != '\r' && text[i] != '\n') {
          ++i;
        }
        tokens_.push_back({std::string_view(text).substr(start, i - start), line});
      }
    }
    last_line_ = line;
  }

  [[nodiscard]] bool done() const { return pos_ >= tokens_.size(); }
  [[nodiscard]] std::size_t line() const { return done() ? last_line_ : tokens_[pos_].line; }

  std::string_view word(const char* what) {
    if (done()) {
      throw ParseError(std::string("unexpected end of file, expected ") + what, last_line_);
    }
    return tokens_[pos_++].text;
  }

  void expect(std::string_view keyword) {
    const std::size_t l = line();
    const auto w = word(std::string(keyword).c_str());
    if (w != keyword) {
      throw ParseError("expected '" + std::string(keyword) + "', found '" + std::string(w) + "'", l);
    }
  }

  long integer(const char* what) {
    const std::size_t l = line();
    const auto w = word(what);
    long v = 0;
    const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size()) {
      throw ParseError(std::string("expected integer ") + what + ", found '" + std::string(w) + "'", l);
    }
    return v;
  }

  long count(const char* what) {
    const std::size_t l = line();
    const long v = integer(what);
    if (v < 0) {
      throw ParseError(std::string("negative ") + what, l);
    }
    return v;
  }

  double real(const char* what) {
    const std::size_t l = line();
    const auto w = word(what);
    double v = 0;
    const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size()) {
      throw ParseError(std::string("expected number ") + what + ", found '" + std::string(w) + "'", l);
    }
    return v;
  }

private:
  struct Token {
    std::string_view text;
    std::size_t line;
  };
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t last_line_ = 1;
};

void check_valid(const PolyMesh& mesh) {
  const auto report = validate_mesh(mesh);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    std::string ids;
    for (long e : v.entities) {
      ids += " " + std::to_string(e);
    }
    throw ValidationError(std::string("invalid mesh (") + to_string(v.kind) + "):" + ids + ": " + v.message + " [" +
                          std::to_string(report.violations.size()) + " violation(s)]");
  }
}

// ---------------------------------------------------------------------------
// Native format

std::string write_native(const PolyMesh& mesh) {
  std::string out;
  out += "vemdd-mesh 1\n";
  out += "dim " + std::to_string(mesh.dim()) + "\n";
  out += "vertices " + std::to_string(mesh.num_vertices()) + "\n";
  for (const auto& p : mesh.vertices()) {
    for (int d = 0; d < mesh.dim(); ++d) {
      if (d > 0) {
        out += ' ';
      }
      append_double(out, p[d]);
    }
    out += '\n';
  }
  auto write_lists = [&out](const char* name, const std::vector<std::vector<int>>& lists) {
    out += std::string(name) + " " + std::to_string(lists.size()) + "\n";
    for (const auto& l : lists) {
      out += std::to_string(l.size());
      for (int i : l) {
        out += ' ' + std::to_string(i);
      }
      out += '\n';
    }
  };
  if (mesh.dim() == 3) {
    write_lists("faces", mesh.faces());
  }
  write_lists("cells", mesh.cells());
  return out;
}

PolyMesh parse_native(const std::string& text, bool validate) {
  Tokens t(text, '#');
  t.expect("vemdd-mesh");
  {
    const std::size_t l = t.line();
    if (t.integer("format version") != 1) {
      throw ParseError("unsupported format version", l);
    }
  }
  t.expect("dim");
  const std::size_t dim_line = t.line();
  const long dim = t.integer("dimension");
  if (dim != 2 && dim != 3) {
    throw ParseError("dimension must be 2 or 3", dim_line);
  }
  t.expect("vertices");
  const long nv = t.count("vertex count");
  std::vector<Point> vertices(nv, Point{0, 0, 0});
  for (auto& p : vertices) {
    for (int d = 0; d < dim; ++d) {
      p[d] = t.real("coordinate");
    }
  }
  auto read_lists = [&t](const char* name, const char* item) {
    t.expect(name);
    const long n = t.count(name);
    std::vector<std::vector<int>> lists(n);
    for (auto& l : lists) {
      const long m = t.count(item);
      l.resize(m);
      for (auto& i : l) {
        i = static_cast<int>(t.integer("index"));
      }
    }
    return lists;
  };
  std::vector<std::vector<int>> faces;
  if (dim == 3) {
    faces = read_lists("faces", "face size");
  }
  auto cells = read_lists("cells", "cell size");
  if (!t.done()) {
    throw ParseError("trailing data after cell list", t.line());
  }
  PolyMesh mesh = dim == 2 ? PolyMesh::from_polygons(std::move(vertices), std::move(cells))
                           : PolyMesh::from_polyhedra(std::move(vertices), std::move(faces), std::move(cells));
  if (validate) {
    check_valid(mesh);
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// Legacy VTK

std::string write_vtk(const PolyMesh& mesh, const VtkFields& fields) {
  std::string out;
  out += "# vtk DataFile Version 4.2\n";
  out += "vemdd polygonal mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(mesh.num_vertices()) + " double\n";
  for (const auto& p : mesh.vertices()) {
    append_double(out, p[0]);
    out += ' ';
    append_double(out, p[1]);
    out += ' ';
    append_double(out, p[2]);
    out += '\n';
  }
  std::vector<std::vector<int>> streams(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    auto& s = streams[c];
    if (mesh.dim() == 2) {
      s = mesh.cell(c);
    } else {
      const auto& fl = mesh.cell(c);
      const auto& sign = mesh.cell_face_orientation(c);
      s.push_back(static_cast<int>(fl.size()));
      for (std::size_t i = 0; i < fl.size(); ++i) {
        auto loop = mesh.face(fl[i]);
        if (sign[i] < 0) {
          std::reverse(loop.begin(), loop.end());
        }
        s.push_back(static_cast<int>(loop.size()));
        s.insert(s.end(), loop.begin(), loop.end());
      }
    }
  }
  std::size_t total = 0;
  for (const auto& s : streams) {
    total += s.size() + 1;
  }
  out += "CELLS " + std::to_string(mesh.num_cells()) + " " + std::to_string(total) + "\n";
  for (const auto& s : streams) {
    out += std::to_string(s.size());
    for (int i : s) {
      out += ' ' + std::to_string(i);
    }
    out += '\n';
  }
  out += "CELL_TYPES " + std::to_string(mesh.num_cells()) + "\n";
  const int type = mesh.dim() == 2 ? kVtkPolygon : kVtkPolyhedron;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    out += std::to_string(type) + "\n";
  }
  if (!fields.cell_labels.empty()) {
    out += "CELL_DATA " + std::to_string(mesh.num_cells()) + "\n";
    for (const auto& [name, values] : fields.cell_labels) {
      if (values.size() != mesh.num_cells()) {
        throw ShapeError("cell field '" + name + "' has wrong length");
      }
      out += "SCALARS " + name + " int 1\nLOOKUP_TABLE default\n";
      for (int v : values) {
        out += std::to_string(v) + "\n";
      }
    }
  }
  if (!fields.point_scalars.empty()) {
    out += "POINT_DATA " + std::to_string(mesh.num_vertices()) + "\n";
    for (const auto& [name, values] : fields.point_scalars) {
      if (values.size() != mesh.num_vertices()) {
        throw ShapeError("point field '" + name + "' has wrong length");
      }
      out += "SCALARS " + name + " double 1\nLOOKUP_TABLE default\n";
      for (double v : values) {
        append_double(out, v);
        out += '\n';
      }
    }
  }
  return out;
}

// Face loops of the VTK linear cells we accept as 3D input.
std::vector<std::vector<int>> linear_cell_faces(int type, const std::vector<int>& ids) {
  if (type == kVtkTetra) {
    return {{ids[0], ids[2], ids[1]}, {ids[0], ids[1], ids[3]}, {ids[1], ids[2], ids[3]}, {ids[0], ids[3], ids[2]}};
  }
  // hexahedron
  return {{ids[0], ids[3], ids[2], ids[1]}, {ids[4], ids[5], ids[6], ids[7]}, {ids[0], ids[1], ids[5], ids[4]},
          {ids[1], ids[2], ids[6], ids[5]}, {ids[2], ids[3], ids[7], ids[6]}, {ids[3], ids[0], ids[4], ids[7]}};
}

PolyMesh parse_vtk(const std::string& text, bool validate) {
  // The header line and title are free text.
  std::size_t body = 0;
  for (int skipped = 0; skipped < 2; ++skipped) {
    body = text.find('\n', body);
    if (body == std::string::npos) {
      throw ParseError("truncated VTK header", 1);
    }
    ++body;
  }
  if (text.rfind("# vtk DataFile", 0) != 0) {
    throw ParseError("missing '# vtk DataFile' header", 1);
  }
  const std::string rest = std::string(2, '\n') + text.substr(body);
  Tokens t(rest, 0);
  t.expect("ASCII");
  t.expect("DATASET");
  t.expect("UNSTRUCTURED_GRID");
  t.expect("POINTS");
  const long np = t.count("point count");
  t.word("point data type");
  std::vector<Point> points(np);
  for (auto& p : points) {
    p = {t.real("x"), t.real("y"), t.real("z")};
  }
  t.expect("CELLS");
  const long nc = t.count("cell count");
  t.count("cell list size");
  std::vector<std::vector<int>> streams(nc);
  std::vector<std::size_t> stream_line(nc);
  for (long c = 0; c < nc; ++c) {
    stream_line[c] = t.line();
    const long m = t.count("cell stream length");
    streams[c].resize(m);
    for (auto& i : streams[c]) {
      i = static_cast<int>(t.integer("index"));
    }
  }
  t.expect("CELL_TYPES");
  if (t.count("cell type count") != nc) {
    throw ParseError("CELL_TYPES count differs from CELLS count", t.line());
  }
  std::vector<int> types(nc);
  for (auto& ty : types) {
    ty = static_cast<int>(t.integer("cell type"));
  }
  // Trailing CELL_DATA / POINT_DATA sections are ignored.

  const bool planar = std::all_of(types.begin(), types.end(), [](int ty) {
    return ty == kVtkTriangle || ty == kVtkPolygon || ty == kVtkQuad;
  });
  if (planar) {
    return [&] {
      PolyMesh mesh = PolyMesh::from_polygons(std::move(points), std::move(streams));
      if (validate) {
        check_valid(mesh);
      }
      return mesh;
    }();
  }

  std::map<std::vector<int>, int> face_ids;
  std::vector<std::vector<int>> faces;
  std::vector<std::vector<int>> cells(nc);
  for (long c = 0; c < nc; ++c) {
    std::vector<std::vector<int>> cell_faces;
    const auto& s = streams[c];
    if (types[c] == kVtkPolyhedron) {
      std::size_t pos = 0;
      if (s.empty()) {
        throw ParseError("empty polyhedron stream", stream_line[c]);
      }
      const int nf = s[pos++];
      for (int f = 0; f < nf; ++f) {
        if (pos >= s.size()) {
          throw ParseError("truncated polyhedron face stream", stream_line[c]);
        }
        const int m = s[pos++];
        if (m < 0 || pos + m > s.size()) {
          throw ParseError("truncated polyhedron face stream", stream_line[c]);
        }
        cell_faces.emplace_back(s.begin() + pos, s.begin() + pos + m);
        pos += m;
      }
      if (pos != s.size()) {
        throw ParseError("polyhedron stream length mismatch", stream_line[c]);
      }
    } else if ((types[c] == kVtkHexahedron && s.size() == 8) || (types[c] == kVtkTetra && s.size() == 4)) {
      cell_faces = linear_cell_faces(types[c], s);
    } else {
      throw ParseError("unsupported VTK cell type " + std::to_string(types[c]) + " in a 3D mesh", stream_line[c]);
    }
    for (auto& loop : cell_faces) {
      auto key = loop;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = face_ids.try_emplace(key, static_cast<int>(faces.size()));
      if (inserted) {
        faces.push_back(std::move(loop));
      }
      cells[c].push_back(it->second);
    }
  }
  PolyMesh mesh = PolyMesh::from_polyhedra(std::move(points), std::move(faces), std::move(cells));
  if (validate) {
    check_valid(mesh);
  }
  return mesh;
}

} // namespace

MeshFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".vtk" ? MeshFormat::Vtk : MeshFormat::Native;
}

std::string write_mesh(const PolyMesh& mesh, MeshFormat format, const VtkFields& fields) {
  return format == MeshFormat::Vtk ? write_vtk(mesh, fields) : write_native(mesh);
}

PolyMesh parse_mesh(const std::string& text, MeshFormat format, bool validate) {
  return format == MeshFormat::Vtk ? parse_vtk(text, validate) : parse_native(text, validate);
}

void export_mesh(const PolyMesh& mesh, const std::filesystem::path& path, MeshFormat format, const VtkFields& fields) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << write_mesh(mesh, format, fields);
  if (!out) {
    throw Error("failed writing '" + path.string() + "'");
  }
}

PolyMesh import_mesh(const std::filesystem::path& path, MeshFormat format, bool validate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mesh(ss.str(), format, validate);
}

} // namespace vemdd
