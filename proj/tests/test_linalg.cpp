#include "vemdd/error.hpp"
#include "vemdd/linalg.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace vemdd;

namespace {

// Random sparse SPD matrix: diagonally dominant symmetric pattern.
SparseMatrix random_spd(int n, unsigned seed, int per_row = 4) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::vector<Triplet> t;
  std::vector<double> rowsum(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < per_row; ++r) {
      const int j = pick(rng);
      if (j == i) {
        continue;
      }
      const double v = value(rng);
      t.push_back({i, j, v});
      t.push_back({j, i, v});
      rowsum[i] += std::abs(v);
      rowsum[j] += std::abs(v);
    }
  }
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, rowsum[i] + 1.0});
  }
  return SparseMatrix::from_triplets(n, n, t);
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

} // namespace

TEST(SparseMatrix, TripletsSumDuplicatesDropZeros) {
  const SparseMatrix a = SparseMatrix::from_triplets(2, 3, {{0, 1, 2.0}, {0, 1, 3.0}, {1, 2, 1.0}, {1, 2, -1.0}, {1, 0, 4.0}});
  EXPECT_EQ(a.nnz(), 2u);
  EXPECT_EQ(a.coeff(0, 1), 5.0);
  EXPECT_EQ(a.coeff(1, 2), 0.0);
  EXPECT_EQ(a.coeff(1, 0), 4.0);
}

TEST(SparseMatrix, OutOfRangeTriplet) {
  EXPECT_THROW((void)SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), ShapeError);
}

TEST(SparseMatrix, MatchesDenseProducts) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(30, 20);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(30, 7);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 20; ++j) {
      if ((i * 7 + j * 3) % 5 == 0) {
        a(i, j) = value(rng);
      }
    }
    for (int j = 0; j < 7; ++j) {
      if ((i + j) % 3 == 0) {
        r(i, j) = value(rng);
      }
    }
  }
  const SparseMatrix sa = SparseMatrix::from_dense(a);
  EXPECT_EQ(sa.to_dense(), a);
  EXPECT_EQ(sa.transpose().to_dense(), a.transpose());

  std::vector<double> x(20);
  for (double& xi : x) {
    xi = value(rng);
  }
  EXPECT_LT((to_eigen(sa.multiply(x)) - a * to_eigen(x)).norm(), 1e-14);
  std::vector<double> y(30, 1.0);
  EXPECT_LT((to_eigen(sa.multiply_transpose(y)) - a.transpose() * to_eigen(y)).norm(), 1e-14);
  EXPECT_THROW((void)spmv(sa, y), ShapeError);

  const SparseMatrix k = random_spd(30, 9);
  const Eigen::MatrixXd kd = k.to_dense();
  const SparseMatrix sr = SparseMatrix::from_dense(r);
  EXPECT_LT((triple_product(sr, k).to_dense() - r.transpose() * kd * r).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((multiply(k, sr).to_dense() - kd * r).cwiseAbs().maxCoeff(), 1e-14);

  const std::vector<int> rows{5, 1, 7};
  const std::vector<int> cols{0, 3};
  const Eigen::MatrixXd sub = sa.submatrix(rows, cols).to_dense();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_EQ(sub(i, j), a(rows[i], cols[j]));
    }
  }
}

TEST(SparseMatrix, Symmetry) {
  EXPECT_TRUE(random_spd(50, 1).is_symmetric());
  EXPECT_FALSE(SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}}).is_symmetric());
}

class FactorizationSize : public ::testing::TestWithParam<int> {};

TEST_P(FactorizationSize, SolvesAgainstDenseOracle) {
  const int n = GetParam();
  const SparseMatrix k = random_spd(n, 17u + static_cast<unsigned>(n));
  const Factorization f = Factorization::factorize(k);
  EXPECT_EQ(f.is_dense(), n < 200);
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) {
    b[i] = std::sin(i + 1.0);
  }
  const Eigen::VectorXd oracle = k.to_dense().llt().solve(to_eigen(b));
  const Eigen::VectorXd x = to_eigen(f.solve(b));
  EXPECT_LT((x - oracle).norm() / oracle.norm(), 1e-12);
  EXPECT_GT(f.pivot_range().first, 0.0);

  Eigen::MatrixXd rhs(n, 3);
  rhs.col(0) = to_eigen(b);
  rhs.col(1).setOnes();
  rhs.col(2).setLinSpaced(-1.0, 1.0);
  const Eigen::MatrixXd xs = f.solve(rhs);
  EXPECT_LT((k.to_dense() * xs - rhs).norm(), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(DenseAndSparse, FactorizationSize, ::testing::Values(1, 10, 199, 200, 800));

TEST(Factorization, IndefiniteRejected) {
  const SparseMatrix a = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, -1.0}});
  EXPECT_THROW((void)Factorization::factorize(a), NotSpdError);
  FactorOptions sparse;
  sparse.dense_threshold = 0;
  EXPECT_THROW((void)Factorization::factorize(a, sparse), NotSpdError);
}

TEST(Factorization, SingularRejected) {
  // 1D Neumann Laplacian: constants in the kernel.
  std::vector<Triplet> t;
  const int n = 300;
  for (int i = 0; i + 1 < n; ++i) {
    t.push_back({i, i, 1.0});
    t.push_back({i + 1, i + 1, 1.0});
    t.push_back({i, i + 1, -1.0});
    t.push_back({i + 1, i, -1.0});
  }
  const SparseMatrix a = SparseMatrix::from_triplets(n, n, t);
  EXPECT_THROW((void)Factorization::factorize(a), SingularMatrixError);
}

TEST(Factorization, NonSquareRejected) {
  EXPECT_THROW((void)Factorization::factorize(SparseMatrix(3, 2)), ShapeError);
}

TEST(MatrixMarket, RoundTripBitwise) {
  const SparseMatrix k = random_spd(40, 5);
  const auto path = std::filesystem::temp_directory_path() / "vemdd_k.mtx";
  write_matrix_market(k, path);
  const SparseMatrix back = read_matrix_market(path);
  EXPECT_EQ(back.to_dense(), k.to_dense());

  std::vector<double> v{1.0 / 3.0, -2.5e-300, 7.0};
  const auto vpath = std::filesystem::temp_directory_path() / "vemdd_v.mtx";
  write_matrix_market_vector(v, vpath);
  EXPECT_EQ(read_matrix_market_vector(vpath), v);
  std::filesystem::remove(path);
  std::filesystem::remove(vpath);
}

TEST(VectorOps, Basics) {
  std::vector<double> a{3.0, 4.0};
  std::vector<double> b{1.0, 2.0};
  EXPECT_EQ(dot(a, b), 11.0);
  EXPECT_EQ(norm2(a), 5.0);
  axpy(2.0, b, a);
  EXPECT_EQ(a, (std::vector<double>{5.0, 8.0}));
}
