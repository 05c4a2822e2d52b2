#include "vemdd/error.hpp"
#include "vemdd/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <optional>

namespace vemdd {

namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using SparseLdlt = Eigen::SimplicialLDLT<EigenSparse, Eigen::Lower, Eigen::AMDOrdering<int>>;

// Lower triangle in column-major form: row i of the CSR upper part is column i.
EigenSparse to_eigen_lower(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(a.nnz() / 2 + a.rows());
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto v = a.values();
  for (int i = 0; i < a.rows(); ++i) {
    for (int p = rp[i]; p < rp[i + 1]; ++p) {
      if (ci[p] <= i) {
        t.emplace_back(i, ci[p], v[p]);
      }
    }
  }
  EigenSparse m(a.rows(), a.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

std::pair<double, double> check_pivots(const Eigen::VectorXd& d, int n) {
  if (n == 0) {
    return {0.0, 0.0};
  }
  const double dmax = d.cwiseAbs().maxCoeff();
  const double dmin = d.minCoeff();
  const double zero_tol = 1e-14 * dmax;
  if (!(dmax > 0.0) || !std::isfinite(dmax)) {
    throw SingularMatrixError("factorization: all pivots zero or non-finite");
  }
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < -zero_tol) {
      throw NotSpdError("factorization: negative pivot " + std::to_string(d(i)) + " at position " +
                        std::to_string(i) + "; matrix is not positive definite");
    }
  }
  if (dmin <= zero_tol) {
    throw SingularMatrixError("factorization: zero pivot; matrix is singular to working precision");
  }
  return {dmin, d.maxCoeff()};
}

} // namespace

struct Factorization::Impl {
  std::optional<Eigen::LDLT<Eigen::MatrixXd>> dense;
  std::optional<SparseLdlt> sparse;
  std::optional<SparseMatrix> original; // kept for iterative refinement
  int refinement_steps = 0;

  void raw_solve(Eigen::Map<Eigen::VectorXd>& x) const {
    if (dense) {
      x = dense->solve(x);
    } else {
      x = sparse->solve(x);
    }
  }
};

Factorization::Factorization() : impl_(std::make_unique<Impl>()) {}
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;
Factorization::~Factorization() = default;

bool Factorization::is_dense() const noexcept { return impl_->dense.has_value(); }

Factorization Factorization::factorize(const SparseMatrix& a, const FactorOptions& options) {
  if (a.rows() != a.cols()) {
    throw ShapeError("factorize: matrix is not square");
  }
  Factorization f;
  f.n_ = a.rows();
  f.impl_->refinement_steps = options.refinement_steps;
  if (options.refinement_steps > 0) {
    f.impl_->original = a;
  }
  if (a.rows() == 0) {
    return f;
  }
  if (a.rows() < options.dense_threshold) {
    Eigen::MatrixXd d = a.to_dense();
    f.impl_->dense.emplace(d);
    f.pivot_range_ = check_pivots(f.impl_->dense->vectorD(), f.n_);
  } else {
    f.impl_->sparse.emplace();
    f.impl_->sparse->compute(to_eigen_lower(a));
    if (f.impl_->sparse->info() != Eigen::Success) {
      throw SingularMatrixError("factorization: zero pivot encountered in sparse LDL^T");
    }
    f.pivot_range_ = check_pivots(f.impl_->sparse->vectorD(), f.n_);
  }
  return f;
}

void Factorization::solve_in_place(std::span<double> x) const {
  if (x.size() != static_cast<std::size_t>(n_)) {
    throw ShapeError("solve: right-hand side length mismatch");
  }
  if (n_ == 0) {
    return;
  }
  Eigen::Map<Eigen::VectorXd> xv(x.data(), n_);
  if (impl_->refinement_steps == 0) {
    impl_->raw_solve(xv);
    return;
  }
  const Eigen::VectorXd b = xv;
  impl_->raw_solve(xv);
  std::vector<double> r(n_);
  for (int step = 0; step < impl_->refinement_steps; ++step) {
    impl_->original->multiply(x, r);
    Eigen::Map<Eigen::VectorXd> rv(r.data(), n_);
    rv = b - rv;
    impl_->raw_solve(rv);
    xv += rv;
  }
}

std::vector<double> Factorization::solve(std::span<const double> b) const {
  std::vector<double> x(b.begin(), b.end());
  solve_in_place(x);
  return x;
}

Eigen::MatrixXd Factorization::solve(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd x = b;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    solve_in_place(std::span<double>(x.col(j).data(), static_cast<std::size_t>(x.rows())));
  }
  return x;
}

} // namespace vemdd
