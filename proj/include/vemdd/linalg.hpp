#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace vemdd {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row and no explicit zeros are stored.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(static_cast<std::size_t>(rows) + 1, 0) {}

  /// Sums duplicate entries and drops exact zeros. Throws ShapeError on
  /// out-of-range indices.
  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);
  /// Takes ownership of finalized CSR arrays (validated).
  static SparseMatrix from_csr(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
                               std::vector<double> values);
  static SparseMatrix identity(int n);
  static SparseMatrix from_dense(const Eigen::MatrixXd& dense, double drop_tol = 0.0);

  [[nodiscard]] int rows() const noexcept { return rows_; }
  [[nodiscard]] int cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const int> row_ptr() const noexcept { return row_ptr_; }
  [[nodiscard]] std::span<const int> col_idx() const noexcept { return col_idx_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  /// Entry (i, j), zero when not stored.
  [[nodiscard]] double coeff(int i, int j) const;

  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y) const;
  [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;
  /// y = A^T x.
  [[nodiscard]] std::vector<double> multiply_transpose(std::span<const double> x) const;

  [[nodiscard]] SparseMatrix transpose() const;
  /// Rows and columns selected by index lists (in the given order).
  [[nodiscard]] SparseMatrix submatrix(std::span<const int> rows, std::span<const int> cols) const;
  [[nodiscard]] Eigen::MatrixXd to_dense() const;

  /// max |A - A^T| <= tol * max |A|.
  [[nodiscard]] bool is_symmetric(double rel_tol = 1e-12) const;
  [[nodiscard]] double max_abs() const;

  void set_symmetric_flag(bool symmetric) noexcept { symmetric_ = symmetric; }
  [[nodiscard]] bool symmetric_flag() const noexcept { return symmetric_; }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

/// C = A B.
[[nodiscard]] SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);
/// R^T A R for A (n x n) and R (n x m).
[[nodiscard]] SparseMatrix triple_product(const SparseMatrix& r, const SparseMatrix& a);

/// y = A x with shape checks; throws ShapeError.
[[nodiscard]] std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x);

struct FactorOptions {
  /// Matrices with fewer rows use a dense factorization.
  int dense_threshold = 200;
  /// Steps of iterative refinement applied in solve().
  int refinement_steps = 0;
};

/// Cholesky-type factorization of a symmetric positive definite matrix:
/// sparse LDL^T under an approximate-minimum-degree ordering, or dense LDL^T
/// for small blocks. Solves are const and may run concurrently.
class Factorization {
public:
  /// Throws NotSpdError on a negative pivot, SingularMatrixError on a zero pivot.
  static Factorization factorize(const SparseMatrix& a, const FactorOptions& options = {});

  /// Factorization of the 0 x 0 matrix.
  Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;
  ~Factorization();

  [[nodiscard]] int size() const noexcept { return n_; }
  [[nodiscard]] bool is_dense() const noexcept;

  [[nodiscard]] std::vector<double> solve(std::span<const double> b) const;
  void solve_in_place(std::span<double> x) const;
  /// Solves for every column of b.
  [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  /// Smallest and largest diagonal pivot of the LDL^T factor.
  [[nodiscard]] std::pair<double, double> pivot_range() const noexcept { return pivot_range_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
  std::pair<double, double> pivot_range_{0.0, 0.0};
};

// Vector helpers.
[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double norm2(std::span<const double> a);
/// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// MatrixMarket coordinate format (real general / symmetric on read; general on write).
void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path);
[[nodiscard]] SparseMatrix read_matrix_market(const std::filesystem::path& path);
void write_matrix_market_vector(std::span<const double> v, const std::filesystem::path& path);
[[nodiscard]] std::vector<double> read_matrix_market_vector(const std::filesystem::path& path);

} // namespace vemdd
