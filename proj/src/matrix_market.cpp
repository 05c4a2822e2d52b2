#include "vemdd/error.hpp"
#include "vemdd/linalg.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace vemdd {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open '" + path.string() + "'");
  }
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << std::setprecision(17);
  return out;
}

// Reads the banner and skips comments; returns the size line.
std::string read_header(std::istream& in, std::string& banner, std::size_t& line_no) {
  if (!std::getline(in, banner) || banner.rfind("%%MatrixMarket", 0) != 0) {
    throw ParseError("missing %%MatrixMarket banner", 1);
  }
  line_no = 1;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] != '%') {
      return line;
    }
  }
  throw ParseError("missing size line", line_no);
}

} // namespace

void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (int i = 0; i < a.rows(); ++i) {
    for (int p = rp[i]; p < rp[i + 1]; ++p) {
      out << i + 1 << ' ' << ci[p] + 1 << ' ' << v[p] << '\n';
    }
  }
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string banner;
  std::size_t line_no = 0;
  const std::string size_line = read_header(in, banner, line_no);
  if (banner.find("coordinate") == std::string::npos || banner.find("real") == std::string::npos) {
    throw ParseError("only 'coordinate real' matrices are supported", 1);
  }
  const bool symmetric = banner.find("symmetric") != std::string::npos;
  std::istringstream ss(size_line);
  int rows = 0;
  int cols = 0;
  long nnz = 0;
  if (!(ss >> rows >> cols >> nnz)) {
    throw ParseError("malformed size line", line_no);
  }
  std::vector<Triplet> t;
  t.reserve(symmetric ? 2 * nnz : nnz);
  std::string line;
  for (long k = 0; k < nnz; ++k) {
    if (!std::getline(in, line)) {
      throw ParseError("unexpected end of file", line_no + 1);
    }
    ++line_no;
    std::istringstream es(line);
    int i = 0;
    int j = 0;
    double v = 0.0;
    if (!(es >> i >> j >> v) || i < 1 || j < 1 || i > rows || j > cols) {
      throw ParseError("malformed entry", line_no);
    }
    t.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) {
      t.push_back({j - 1, i - 1, v});
    }
  }
  auto m = SparseMatrix::from_triplets(rows, cols, std::move(t));
  m.set_symmetric_flag(symmetric);
  return m;
}

void write_matrix_market_vector(std::span<const double> v, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  for (double x : v) {
    out << x << '\n';
  }
}

std::vector<double> read_matrix_market_vector(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string banner;
  std::size_t line_no = 0;
  const std::string size_line = read_header(in, banner, line_no);
  if (banner.find("array") == std::string::npos) {
    throw ParseError("expected an 'array' vector", 1);
  }
  std::istringstream ss(size_line);
  long rows = 0;
  long cols = 0;
  if (!(ss >> rows >> cols) || cols != 1) {
    throw ParseError("expected an n x 1 array", line_no);
  }
  std::vector<double> v(rows);
  std::string line;
  for (auto& x : v) {
    if (!std::getline(in, line)) {
      throw ParseError("unexpected end of file", line_no + 1);
    }
    ++line_no;
    std::istringstream es(line);
    if (!(es >> x)) {
      throw ParseError("malformed value", line_no);
    }
  }
  return v;
}

} // namespace vemdd
