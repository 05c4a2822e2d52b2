#include "vemdd/error.hpp"
#include "vemdd/mesh_generators.hpp"
#include "vemdd/problems.hpp"
#include "vemdd/schwarz.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>

using namespace vemdd;

namespace {

struct Scenario {
  Scenario(PolyMesh m, int k, std::array<int, 3> grid, int overlap)
      : mesh(std::move(m)), dofs(mesh, k),
        system(assemble(mesh, dofs, builtin_problem("benchmark", mesh.dim()).f, builtin_problem("benchmark", mesh.dim()).u)),
        partition(partition_geometric(mesh, grid)) {
    grow_overlap(partition, mesh, dofs, overlap);
    classification = classify_interface(partition, dofs);
  }
  Scenario(const Scenario&) = delete;
  Scenario& operator=(const Scenario&) = delete;

  PolyMesh mesh;
  DofMap dofs;
  AssembledSystem system;
  Partition partition;
  InterfaceClassification classification;
};

Eigen::VectorXd to_eigen(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

std::vector<double> random_vector(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& x : v) {
    x = normal(rng);
  }
  return v;
}

// Dense M^{-1} = Phi K0^{-1} Phi^T + sum_i P_i K_i^{-1} R_i from first principles.
Eigen::MatrixXd dense_preconditioner(const Scenario& s, SchwarzMode mode, const SparseMatrix* phi) {
  const Eigen::MatrixXd k = s.system.K.to_dense();
  const Eigen::Index n = k.rows();
  std::vector<int> owner(n, -1);
  for (int d = 0; d < n; ++d) {
    owner[d] = s.partition.dof_sharing[d].front();
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int sub = 0; sub < s.partition.num_subdomains; ++sub) {
    const auto& set = s.partition.overlap_dofs[sub];
    const Eigen::Index ni = static_cast<Eigen::Index>(set.size());
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(ni, n);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(ni, n);
    for (Eigen::Index i = 0; i < ni; ++i) {
      r(i, set[i]) = 1.0;
      if (mode == SchwarzMode::AS || owner[set[i]] == sub) {
        p(i, set[i]) = 1.0;
      }
    }
    const Eigen::MatrixXd ki = r * k * r.transpose();
    m += p.transpose() * ki.llt().solve(r);
  }
  if (phi != nullptr) {
    const Eigen::MatrixXd f = phi->to_dense();
    const Eigen::MatrixXd k0 = f.transpose() * k * f;
    m += f * k0.llt().solve(f.transpose());
  }
  return m;
}

std::vector<double> direct_solution(const Scenario& s) {
  return Factorization::factorize(s.system.K).solve(s.system.b);
}

double relative_difference(const std::vector<double>& a, const std::vector<double>& b) {
  return (to_eigen(a) - to_eigen(b)).norm() / to_eigen(b).norm();
}

} // namespace

TEST(SchwarzMode, Parse) {
  EXPECT_EQ(parse_schwarz_mode("RAS"), SchwarzMode::RAS);
  EXPECT_EQ(parse_schwarz_mode("as"), SchwarzMode::AS);
  EXPECT_THROW((void)parse_schwarz_mode("oras"), ConfigError);
}

TEST(Schwarz, SingleSubdomainIsExactInverse) {
  const Scenario s(generate_voronoi_2d(200, 3), 2, {1, 1, 1}, 1);
  const SchwarzPreconditioner m(s.system.K, s.partition, SchwarzMode::RAS);
  const std::vector<double> r = random_vector(s.dofs.num_free(), 1);
  const std::vector<double> z = m.apply(r);
  EXPECT_LT(relative_difference(s.system.K.multiply(z), r), 1e-10);
  const KrylovResult result = gmres_solve(s.system.K, s.system.b, m, {});
  EXPECT_TRUE(result.converged);
  EXPECT_EQ(result.iterations, 1);
}

TEST(Schwarz, ZeroResidualGivesZero) {
  const Scenario s(generate_structured_box(2, 8), 1, {2, 2, 1}, 1);
  const CoarseBasis basis = build_coarse_basis(CoarseKind::GDSW, s.system.K, s.partition, s.classification, s.dofs);
  const SchwarzPreconditioner m(s.system.K, s.partition, SchwarzMode::AS, &basis.phi);
  for (double z : m.apply(std::vector<double>(s.dofs.num_free(), 0.0))) {
    EXPECT_EQ(z, 0.0);
  }
}

TEST(Schwarz, RequiresOverlap) {
  const PolyMesh mesh = generate_structured_box(2, 4);
  const DofMap dofs(mesh, 1);
  Partition p = partition_geometric(mesh, {2, 2, 1});
  assign_dofs(p, dofs);
  const SparseMatrix k = SparseMatrix::identity(dofs.num_free());
  EXPECT_THROW(SchwarzPreconditioner(k, p, SchwarzMode::AS), Error);
}

class DenseOracle : public ::testing::TestWithParam<std::tuple<SchwarzMode, int>> {};

TEST_P(DenseOracle, ApplicationMatches) {
  const auto [mode, coarse] = GetParam();
  const Scenario s(generate_voronoi_2d(400, 12), 1, {2, 2, 1}, 1);
  ASSERT_LE(s.dofs.num_free(), 2000);
  std::optional<CoarseBasis> basis;
  if (coarse >= 0) {
    basis = build_coarse_basis(static_cast<CoarseKind>(coarse), s.system.K, s.partition, s.classification, s.dofs);
  }
  const SparseMatrix* phi = basis ? &basis->phi : nullptr;
  const SchwarzPreconditioner m(s.system.K, s.partition, mode, phi);
  const Eigen::MatrixXd oracle = dense_preconditioner(s, mode, phi);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const std::vector<double> r = random_vector(s.dofs.num_free(), seed);
    const Eigen::VectorXd expected = oracle * to_eigen(r);
    EXPECT_LT((to_eigen(m.apply(r)) - expected).cwiseAbs().maxCoeff(), 1e-12 * expected.cwiseAbs().maxCoeff());
  }
}

INSTANTIATE_TEST_SUITE_P(Configurations, DenseOracle,
                         ::testing::Combine(::testing::Values(SchwarzMode::AS, SchwarzMode::RAS),
                                            ::testing::Values(-1, 0, 1, 2)));

TEST(Schwarz, AdditiveIsSymmetric) {
  const Scenario s(generate_voronoi_2d(900, 5), 2, {3, 3, 1}, 1);
  const CoarseBasis basis = build_coarse_basis(CoarseKind::RGDSW, s.system.K, s.partition, s.classification, s.dofs);
  const SchwarzPreconditioner m(s.system.K, s.partition, SchwarzMode::AS, &basis.phi);
  EXPECT_TRUE(m.symmetric());
  for (unsigned seed = 0; seed < 10; ++seed) {
    const std::vector<double> x = random_vector(m.size(), 2 * seed);
    const std::vector<double> y = random_vector(m.size(), 2 * seed + 1);
    const double xmy = dot(x, m.apply(y));
    const double ymx = dot(y, m.apply(x));
    EXPECT_NEAR(xmy, ymx, 1e-12 * std::abs(xmy));
  }
}

TEST(Schwarz, RestrictedOwnershipPartitionsDofs) {
  const Scenario s(generate_voronoi_2d(700, 8), 2, {3, 2, 1}, 2);
  const SchwarzPreconditioner m(s.system.K, s.partition, SchwarzMode::RAS);
  std::vector<int> count(m.size(), 0);
  for (int sub = 0; sub < m.num_subdomains(); ++sub) {
    for (int pos : m.owned_positions(sub)) {
      ++count[m.local_dofs(sub)[pos]];
    }
  }
  for (int c : count) {
    EXPECT_EQ(c, 1);
  }
  const std::vector<int> owners = ras_owners(s.partition);
  for (int d = 0; d < m.size(); ++d) {
    EXPECT_EQ(owners[d], s.partition.dof_sharing[d].front());
  }
}

TEST(Krylov, IdentityOperatorOneIteration) {
  const int n = 50;
  const SparseMatrix k = SparseMatrix::identity(n);
  const IdentityPreconditioner m(n);
  const std::vector<double> b = random_vector(n, 4);
  for (KrylovMethod method : {KrylovMethod::GMRES, KrylovMethod::CG}) {
    KrylovConfig config;
    config.method = method;
    const KrylovResult r = krylov_solve(k, b, m, config);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_LT(relative_difference(r.x, b), 1e-14);
  }
}

TEST(Krylov, DiagonalWithExactPreconditioner) {
  std::vector<Triplet> t;
  for (int i = 0; i < 10; ++i) {
    t.push_back({i, i, static_cast<double>(i + 1)});
  }
  const SparseMatrix k = SparseMatrix::from_triplets(10, 10, t);
  const PolyMesh mesh = generate_structured_box(2, 1);
  Partition p;
  p.num_subdomains = 1;
  p.overlap_levels = 0;
  p.overlap_dofs = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
  p.nonoverlap_dofs = p.overlap_dofs;
  p.dof_sharing.assign(10, {0});
  p.interior_dofs = p.overlap_dofs[0];
  const SchwarzPreconditioner m(k, p, SchwarzMode::RAS);
  const KrylovResult r = gmres_solve(k, std::vector<double>(10, 1.0), m, {});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
}

TEST(Krylov, CgRejectsRestrictedSchwarz) {
  const Scenario s(generate_structured_box(2, 8), 1, {2, 2, 1}, 1);
  const SchwarzPreconditioner m(s.system.K, s.partition, SchwarzMode::RAS);
  EXPECT_FALSE(m.symmetric());
  KrylovConfig config;
  config.method = KrylovMethod::CG;
  EXPECT_THROW((void)krylov_solve(s.system.K, s.system.b, m, config), ConfigError);
}

TEST(Krylov, InvalidConfig) {
  KrylovConfig config;
  config.tol = -1.0;
  EXPECT_THROW(config.validate(), ConfigError);
  config = {};
  config.restart = 0;
  EXPECT_THROW(config.validate(), ConfigError);
}

TEST(Krylov, NonConvergenceReported) {
  const Scenario s(generate_voronoi_2d(2000, 2), 1, {4, 4, 1}, 1);
  const SchwarzPreconditioner m(s.system.K, s.partition, SchwarzMode::RAS);
  KrylovConfig config;
  config.max_iterations = 2;
  const KrylovResult r = gmres_solve(s.system.K, s.system.b, m, config);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
  ASSERT_EQ(r.history.size(), 3u);
  EXPECT_DOUBLE_EQ(r.history[0], 1.0);
  EXPECT_GT(r.final_residual(), config.tol);
}

TEST(Krylov, SolutionsMatchDirectSolve) {
  const Scenario s(generate_voronoi_2d(1500, 7), 2, {4, 4, 1}, 1);
  const std::vector<double> direct = direct_solution(s);
  for (int coarse = -1; coarse < 3; ++coarse) {
    std::optional<CoarseBasis> basis;
    if (coarse >= 0) {
      basis = build_coarse_basis(static_cast<CoarseKind>(coarse), s.system.K, s.partition, s.classification, s.dofs);
    }
    for (SchwarzMode mode : {SchwarzMode::AS, SchwarzMode::RAS}) {
      const SchwarzPreconditioner m(s.system.K, s.partition, mode, basis ? &basis->phi : nullptr);
      for (KrylovMethod method : {KrylovMethod::GMRES, KrylovMethod::CG}) {
        if (method == KrylovMethod::CG && mode == SchwarzMode::RAS) {
          continue;
        }
        KrylovConfig config;
        config.method = method;
        const KrylovResult r = krylov_solve(s.system.K, s.system.b, m, config);
        EXPECT_TRUE(r.converged);
        EXPECT_LE(r.final_residual(), 1e-8);
        EXPECT_LT(relative_difference(r.x, direct), 1e-6) << coarse << " " << to_string(mode) << " " << to_string(method);
        const std::vector<double> res = s.system.K.multiply(r.x);
        EXPECT_NEAR(relative_difference(res, s.system.b), r.final_residual(), 1e-12);
      }
    }
  }
}

TEST(Krylov, CgAndGmresAgreeUnderAdditiveSchwarz) {
  const Scenario s(generate_voronoi_2d(2500, 3), 1, {4, 4, 1}, 1);
  const CoarseBasis basis = build_coarse_basis(CoarseKind::GDSW, s.system.K, s.partition, s.classification, s.dofs);
  const SchwarzPreconditioner m(s.system.K, s.partition, SchwarzMode::AS, &basis.phi);
  KrylovConfig cg;
  cg.method = KrylovMethod::CG;
  const KrylovResult a = krylov_solve(s.system.K, s.system.b, m, cg);
  const KrylovResult b = krylov_solve(s.system.K, s.system.b, m, {});
  EXPECT_LE(std::abs(a.iterations - b.iterations), 3);
  EXPECT_LT(relative_difference(a.x, b.x), 1e-6);
}

TEST(Krylov, RestartedGmresConverges) {
  const Scenario s(generate_voronoi_2d(1000, 9), 1, {3, 3, 1}, 1);
  const SchwarzPreconditioner m(s.system.K, s.partition, SchwarzMode::RAS);
  KrylovConfig config;
  config.restart = 5;
  config.reorthogonalize = false;
  const KrylovResult r = gmres_solve(s.system.K, s.system.b, m, config);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(relative_difference(r.x, direct_solution(s)), 1e-6);
}

TEST(Krylov, HistoryCsv) {
  KrylovResult r;
  r.history = {1.0, 0.5, 0.25};
  r.iterations = 2;
  const auto path = std::filesystem::temp_directory_path() / "vemdd_history.csv";
  write_history_csv(r, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "iteration,residual");
  int lines = 0;
  for (std::string line; std::getline(in, line);) {
    ++lines;
  }
  EXPECT_EQ(lines, 3);
  std::filesystem::remove(path);
}
