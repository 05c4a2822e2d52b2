#include "vemdd/error.hpp"
#include "vemdd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vemdd {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
  if (rows < 0 || cols < 0) {
    throw ShapeError("negative matrix dimension");
  }
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw ShapeError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) + ") outside " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  // Stable counting sort by row, then sort each row by column; summation
  // order is the input order, which keeps assembly reproducible.
  std::vector<int> count(static_cast<std::size_t>(rows) + 1, 0);
  for (const auto& t : triplets) {
    ++count[t.row + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<Triplet> sorted(triplets.size());
  {
    auto next = count;
    for (const auto& t : triplets) {
      sorted[next[t.row]++] = t;
    }
  }
  SparseMatrix m(rows, cols);
  m.col_idx_.reserve(sorted.size());
  m.values_.reserve(sorted.size());
  for (int i = 0; i < rows; ++i) {
    auto first = sorted.begin() + count[i];
    auto last = sorted.begin() + count[i + 1];
    std::stable_sort(first, last, [](const Triplet& a, const Triplet& b) { return a.col < b.col; });
    for (auto it = first; it != last;) {
      const int c = it->col;
      double sum = 0.0;
      for (; it != last && it->col == c; ++it) {
        sum += it->value;
      }
      if (sum != 0.0) {
        m.col_idx_.push_back(c);
        m.values_.push_back(sum);
      }
    }
    m.row_ptr_[i + 1] = static_cast<int>(m.col_idx_.size());
  }
  return m;
}

SparseMatrix SparseMatrix::from_csr(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
                                    std::vector<double> values) {
  if (row_ptr.size() != static_cast<std::size_t>(rows) + 1 || col_idx.size() != values.size() ||
      row_ptr.front() != 0 || static_cast<std::size_t>(row_ptr.back()) != col_idx.size()) {
    throw ShapeError("inconsistent CSR arrays");
  }
  for (int i = 0; i < rows; ++i) {
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      if (col_idx[p] < 0 || col_idx[p] >= cols || (p > row_ptr[i] && col_idx[p] <= col_idx[p - 1])) {
        throw ShapeError("CSR column indices must be in range and strictly increasing (row " + std::to_string(i) +
                         ")");
      }
    }
  }
  SparseMatrix m(rows, cols);
  m.row_ptr_ = std::move(row_ptr);
  m.col_idx_ = std::move(col_idx);
  m.values_ = std::move(values);
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  SparseMatrix m(n, n);
  m.col_idx_.resize(n);
  m.values_.assign(n, 1.0);
  std::iota(m.col_idx_.begin(), m.col_idx_.end(), 0);
  std::iota(m.row_ptr_.begin(), m.row_ptr_.end(), 0);
  m.symmetric_ = true;
  return m;
}

SparseMatrix SparseMatrix::from_dense(const Eigen::MatrixXd& dense, double drop_tol) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (std::abs(dense(i, j)) > drop_tol) {
        t.push_back({static_cast<int>(i), static_cast<int>(j), dense(i, j)});
      }
    }
  }
  return from_triplets(static_cast<int>(dense.rows()), static_cast<int>(dense.cols()), std::move(t));
}

double SparseMatrix::coeff(int i, int j) const {
  const auto first = col_idx_.begin() + row_ptr_[i];
  const auto last = col_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? values_[it - col_idx_.begin()] : 0.0;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(cols_) || y.size() != static_cast<std::size_t>(rows_)) {
    throw ShapeError("spmv: shape mismatch");
  }
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      s += values_[p] * x[col_idx_[p]];
    }
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

std::vector<double> SparseMatrix::multiply_transpose(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(rows_)) {
    throw ShapeError("spmv transpose: shape mismatch");
  }
  std::vector<double> y(cols_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      y[col_idx_[p]] += values_[p] * x[i];
    }
  }
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t(cols_, rows_);
  std::vector<int> count(static_cast<std::size_t>(cols_) + 1, 0);
  for (int c : col_idx_) {
    ++count[c + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  t.row_ptr_ = count;
  t.col_idx_.resize(col_idx_.size());
  t.values_.resize(values_.size());
  for (int i = 0; i < rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const int dst = count[col_idx_[p]]++;
      t.col_idx_[dst] = i;
      t.values_[dst] = values_[p];
    }
  }
  t.symmetric_ = symmetric_;
  return t;
}

SparseMatrix SparseMatrix::submatrix(std::span<const int> rows, std::span<const int> cols) const {
  std::vector<int> col_map(cols_, -1);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= cols_) {
      throw ShapeError("submatrix: column index out of range");
    }
    col_map[cols[j]] = static_cast<int>(j);
  }
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    if (r < 0 || r >= rows_) {
      throw ShapeError("submatrix: row index out of range");
    }
    for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const int j = col_map[col_idx_[p]];
      if (j >= 0) {
        t.push_back({static_cast<int>(i), j, values_[p]});
      }
    }
  }
  auto sub = from_triplets(static_cast<int>(rows.size()), static_cast<int>(cols.size()), std::move(t));
  sub.symmetric_ = symmetric_ && std::equal(rows.begin(), rows.end(), cols.begin(), cols.end());
  return sub;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      d(i, col_idx_[p]) = values_[p];
    }
  }
  return d;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

bool SparseMatrix::is_symmetric(double rel_tol) const {
  if (rows_ != cols_) {
    return false;
  }
  const double tol = rel_tol * max_abs();
  for (int i = 0; i < rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (std::abs(values_[p] - coeff(col_idx_[p], i)) > tol) {
        return false;
      }
    }
  }
  return true;
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("sparse product: inner dimensions differ");
  }
  const auto arp = a.row_ptr();
  const auto aci = a.col_idx();
  const auto av = a.values();
  const auto brp = b.row_ptr();
  const auto bci = b.col_idx();
  const auto bv = b.values();
  std::vector<int> row_ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<int> col_idx;
  std::vector<double> values;
  std::vector<double> acc(b.cols(), 0.0);
  std::vector<int> marker(b.cols(), -1);
  std::vector<int> pattern;
  for (int i = 0; i < a.rows(); ++i) {
    pattern.clear();
    for (int p = arp[i]; p < arp[i + 1]; ++p) {
      const int k = aci[p];
      for (int q = brp[k]; q < brp[k + 1]; ++q) {
        const int j = bci[q];
        if (marker[j] != i) {
          marker[j] = i;
          pattern.push_back(j);
          acc[j] = 0.0;
        }
        acc[j] += av[p] * bv[q];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (int j : pattern) {
      if (acc[j] != 0.0) {
        col_idx.push_back(j);
        values.push_back(acc[j]);
      }
    }
    row_ptr[i + 1] = static_cast<int>(col_idx.size());
  }
  return SparseMatrix::from_csr(a.rows(), b.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix triple_product(const SparseMatrix& r, const SparseMatrix& a) {
  if (a.rows() != a.cols() || r.rows() != a.rows()) {
    throw ShapeError("triple_product: need A n x n and R n x m");
  }
  auto c = multiply(r.transpose(), multiply(a, r));
  c.set_symmetric_flag(a.symmetric_flag());
  return c;
}

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x) { return a.multiply(x); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: length mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i] * b[i];
  }
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) {
    throw ShapeError("axpy: length mismatch");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] += alpha * x[i];
  }
}

} // namespace vemdd
