// Acceptance checks. Prints one PASS/FAIL line per criterion; with arguments
// ("1" .. "8") only the listed criteria run. Exit status is the number of
// failed lines.

#include "vemdd/coarse.hpp"
#include "vemdd/error.hpp"
#include "vemdd/experiment.hpp"
#include "vemdd/mesh_generators.hpp"
#include "vemdd/problems.hpp"
#include "vemdd/schwarz.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace vemdd;

namespace {

int failures = 0;

void report(const std::string& id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("[%s] criterion %s: %s (%s)\n", pass ? "PASS" : "FAIL", id.c_str(), what.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

void info(const std::string& text) {
  std::printf("       %s\n", text.c_str());
  std::fflush(stdout);
}

std::string join(const std::vector<int>& v, const char* sep = "/") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += (i ? sep : "") + std::to_string(v[i]);
  }
  return s;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

std::string fixed(double x, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

constexpr CoarseKind kKinds[] = {CoarseKind::GDSW, CoarseKind::GDSWStar, CoarseKind::RGDSW};

struct Scenario {
  Scenario(PolyMesh m, int k, std::array<int, 3> grid, int overlap = -1)
      : mesh(std::move(m)), dofs(mesh, k), problem(builtin_problem("benchmark", mesh.dim())),
        system(assemble(mesh, dofs, problem.f, problem.u)), partition(partition_geometric(mesh, grid)) {
    if (overlap >= 0) {
      grow_overlap(partition, mesh, dofs, overlap);
    } else {
      assign_dofs(partition, dofs);
    }
    classification = classify_interface(partition, dofs);
  }
  Scenario(const Scenario&) = delete;
  Scenario& operator=(const Scenario&) = delete;

  PolyMesh mesh;
  DofMap dofs;
  Problem problem;
  AssembledSystem system;
  Partition partition;
  InterfaceClassification classification;
};

// Identity check shared by criteria 1, 3 and 6.
bool identities_hold(const ScalingRow& row, int dim) {
  const int gdsw = row.coarse_dims[0];
  const int star = row.coarse_dims[1];
  const int rgdsw = row.coarse_dims[2];
  const int e = static_cast<int>(row.counts.edges);
  const int f = static_cast<int>(row.counts.faces);
  return dim == 3 ? (gdsw == star + e && gdsw == rgdsw + e + f) : star == rgdsw;
}

std::vector<ScalingRow> identity_rows; // 3D rows checked by criterion 3, including those of criterion 1

// ---------------------------------------------------------------------------

void coarse_dimensions() {
  const std::map<int, std::vector<int>> expected{
      {4, {279, 171, 27}}, {6, {1115, 665, 125}}, {8, {2863, 1687, 343}}, {10, {5859, 3429, 729}}};
  WeakScalingConfig config;
  config.subdomains_per_axis = {4, 6, 8, 10};
  config.dimensions_only = true;
  const auto t0 = std::chrono::steady_clock::now();
  const ScalingReport dims = run_weak_scaling(config);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = dims.rows.size() == expected.size();
  std::string detail;
  for (const ScalingRow& row : dims.rows) {
    const int ns = static_cast<int>(std::lround(std::cbrt(row.subdomains)));
    ok = ok && row.coarse_dims == expected.at(ns);
    detail += (detail.empty() ? "" : "; ") + std::string("n_s=") + std::to_string(ns) + " " + join(row.coarse_dims);
    identity_rows.push_back(row);
  }
  report("1", ok, "coarse dimensions GDSW/GDSW*/RGDSW on hex weak-scaling meshes",
         detail + "; " + fixed(seconds, 1) + " s");
}

void dof_counts() {
  const long a = DofMap(generate_structured_box(3, 20), 1).num_dofs();
  const long b = DofMap(generate_structured_box(3, 20), 2).num_dofs();
  const long c = DofMap(generate_structured_box(3, 30), 2).num_dofs();
  report("2", a == 9261 && b == 68921 && c == 226981, "DOF counts",
         "hex 20^3 k=1 " + std::to_string(a) + ", k=2 " + std::to_string(b) + "; hex 30^3 k=2 " + std::to_string(c));
}

void dimension_identities() {
  bool ok = true;
  int runs3 = 0;
  int runs2 = 0;
  WeakScalingConfig family;
  family.subdomains_per_axis = {2, 3, 4, 6};
  family.orders = {1, 2};
  family.dimensions_only = true;
  for (const ScalingRow& row : run_weak_scaling(family).rows) {
    identity_rows.push_back(row);
  }
  for (const ScalingRow& row : identity_rows) {
    ok = ok && identities_hold(row, 3);
    ++runs3;
  }
  // 2D: Voronoi meshes under several grids, orders 1 and 2
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    for (int k : {1, 2}) {
      StrongScalingConfig config;
      config.mesh.generator = MeshGenerator::Voronoi;
      config.mesh.seeds = 1500;
      config.mesh.rng_seed = seed;
      config.grids = {{2, 2, 1}, {3, 4, 1}, {5, 5, 1}};
      config.settings.k = k;
      config.settings.krylov.max_iterations = 1; // dimensions only matter here
      for (const ScalingRow& row : run_strong_scaling(config).rows) {
        ok = ok && identities_hold(row, 2);
        ++runs2;
      }
    }
  }
  report("3", ok, "coarse dimension identities",
         std::to_string(runs3) + " 3D runs, " + std::to_string(runs2) + " 2D runs");
}

void partition_of_unity() {
  struct Case {
    std::string name;
    std::function<PolyMesh()> mesh;
    int k;
    std::array<int, 3> grid;
  };
  const std::vector<Case> cases{
      {"voronoi 800/seed 1 k=1 3x3", [] { return generate_voronoi_2d(800, 1); }, 1, {3, 3, 1}},
      {"voronoi 1500/seed 2 k=2 4x4", [] { return generate_voronoi_2d(1500, 2); }, 2, {4, 4, 1}},
      {"voronoi 2000/seed 3 k=1 5x3", [] { return generate_voronoi_2d(2000, 3); }, 1, {5, 3, 1}},
      {"voronoi 600/seed 4 k=2 2x3", [] { return generate_voronoi_2d(600, 4); }, 2, {2, 3, 1}},
      {"voronoi 3000/seed 5 k=1 6x6", [] { return generate_voronoi_2d(3000, 5); }, 1, {6, 6, 1}},
      {"hex 10^3 k=1 2x2x2", [] { return generate_structured_box(3, 10); }, 1, {2, 2, 2}},
      {"hex 12^3 k=2 3x3x3", [] { return generate_structured_box(3, 12); }, 2, {3, 3, 3}},
  };
  double worst = 0.0;
  for (const Case& c : cases) {
    const Scenario s(c.mesh(), c.k, c.grid);
    for (CoarseKind kind : kKinds) {
      const CoarseBasis basis = build_coarse_basis(kind, s.system.K, s.partition, s.classification, s.dofs);
      const std::vector<double> rowsum = basis.phi.multiply(std::vector<double>(basis.size(), 1.0));
      for (int d : s.partition.interface_dofs) {
        worst = std::max(worst, std::abs(rowsum[d] - 1.0));
      }
    }
  }
  report("4", worst <= 1e-12, "interface partition of unity, 5 Voronoi + 2 hex cases x 3 kinds",
         "max |sum_j Phi_ij - 1| = " + sci(worst));
}

void vem_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  // patch tests
  struct Patch {
    std::string name;
    std::function<PolyMesh()> mesh;
    int k;
    Stabilization stab;
  };
  const std::vector<Patch> patches{
      {"voronoi k=1", [] { return generate_voronoi_2d(300, 7); }, 1, Stabilization::DRecipe},
      {"voronoi k=2", [] { return generate_voronoi_2d(300, 7); }, 2, Stabilization::DRecipe},
      {"voronoi k=2 dofi-dofi", [] { return generate_voronoi_2d(300, 7); }, 2, Stabilization::DofiDofi},
      {"hex k=1", [] { return generate_structured_box(3, 4); }, 1, Stabilization::DRecipe},
      {"hex k=2", [] { return generate_structured_box(3, 4); }, 2, Stabilization::DRecipe},
  };
  double patch_err = 0.0;
  for (const Patch& p : patches) {
    const PolyMesh mesh = p.mesh();
    const Problem problem = builtin_problem(p.k == 1 ? "linear" : "quadratic", mesh.dim());
    const DofMap dofs(mesh, p.k);
    const AssembledSystem sys = assemble(mesh, dofs, problem.f, problem.u, p.stab);
    const std::vector<double> uh = sys.expand(Factorization::factorize(sys.K).solve(sys.b));
    const std::vector<double> ui = interpolate(dofs, problem.u);
    for (std::size_t i = 0; i < uh.size(); ++i) {
      patch_err = std::max(patch_err, std::abs(uh[i] - ui[i]));
    }
  }
  report("5", patch_err <= 1e-8, "patch test, degree-k solutions reproduced",
         "max DOF error " + sci(patch_err) + " over " + std::to_string(patches.size()) + " meshes");

  struct Family {
    int dim;
    int k;
    std::vector<int> sizes;
  };
  const std::vector<Family> families{
      {2, 1, {8, 16, 32, 64}}, {2, 2, {8, 16, 32, 64}}, {3, 1, {4, 8, 16, 32}}, {3, 2, {2, 4, 8, 16}}};
  for (const Family& f : families) {
    ConvergenceConfig config;
    config.mesh.dim = f.dim;
    config.sizes = f.sizes;
    config.k = f.k;
    const ConvergenceReport r = run_convergence(config);
    std::vector<std::string> rates;
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
      rates.push_back(fixed(r.rows[i].rate_h1, 2));
    }
    const double last = r.rows.back().rate_h1;
    const double band = f.k == 1 ? 0.15 : 0.25;
    std::string list;
    for (const auto& s : rates) {
      list += (list.empty() ? "" : ", ") + s;
    }
    report("5", std::abs(last - f.k) <= band,
           "H1 rate " + std::to_string(f.dim) + "D k=" + std::to_string(f.k) + " in " + std::to_string(f.k) +
               "+-" + fixed(band, 2),
           "rates " + list + " over " + std::to_string(rates.size()) + " refinements; final " + fixed(last, 3));
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report("5", seconds < 600.0, "VEM checks runtime under 10 min", fixed(seconds, 1) + " s");
}

ScalingReport weak_family(bool one_level, const std::vector<int>& ns = {2, 3, 4}) {
  WeakScalingConfig config;
  config.subdomains_per_axis = ns;
  config.one_level = one_level;
  config.settings.mode = SchwarzMode::RAS;
  config.settings.overlap = 1;
  config.settings.krylov.tol = 1e-8;
  config.settings.workers = 1;
  return run_weak_scaling(config);
}

void iteration_behavior() {
  const ScalingReport r = weak_family(true);
  for (const ScalingRow& row : r.rows) {
    info("n_s^3=" + std::to_string(row.subdomains) + ": one-level " + std::to_string(row.one_level_iterations) +
         ", GDSW/GDSW*/RGDSW " + join(row.iterations) + " (coarse " + join(row.coarse_dims) + ")");
  }
  bool converged = r.all_converged();
  for (const ScalingRow& row : r.rows) {
    converged = converged && row.one_level_iterations > 0;
  }
  const ScalingRow& first = r.rows.front();
  const ScalingRow& last = r.rows.back();

  // (a)
  const int gdsw4 = last.iterations[0];
  bool growth_ok = converged;
  std::string growth;
  for (std::size_t j = 0; j < r.kinds.size(); ++j) {
    int lo = first.iterations[j];
    int hi = first.iterations[j];
    for (const ScalingRow& row : r.rows) {
      lo = std::min(lo, row.iterations[j]);
      hi = std::max(hi, row.iterations[j]);
    }
    const double g = lo > 0 ? static_cast<double>(hi - lo) / lo : INFINITY;
    growth_ok = growth_ok && g <= 0.5;
    growth += std::string(growth.empty() ? "" : ", ") + to_string(r.kinds[j]) + " " + fixed(100.0 * g, 0) + "%";
  }
  report("6a", converged && gdsw4 >= 10 && gdsw4 <= 26, "hex weak scaling, GDSW iterations at n_s=4 in [10, 26]",
         std::to_string(gdsw4) + " iterations");
  report("6a", growth_ok, "hex weak scaling, iteration growth <= 50% over n_s in {2,3,4} for every kind",
         "growth " + growth);

  // (b)
  bool larger = converged;
  std::string fails;
  for (const ScalingRow& row : r.rows) {
    const int best_two_level = *std::max_element(row.iterations.begin(), row.iterations.end());
    if (row.one_level_iterations <= best_two_level) {
      larger = false;
      fails += (fails.empty() ? "" : ", ") + std::to_string(row.subdomains);
    }
  }
  report("6b", larger, "one-level RAS needs strictly more iterations than every two-level variant",
         fails.empty() ? "holds on every row" : "violated at n_s^3 = " + fails);
  const int one_growth = last.one_level_iterations - first.one_level_iterations;
  bool faster = converged;
  std::string increments = "one-level +" + std::to_string(one_growth);
  for (std::size_t j = 0; j < r.kinds.size(); ++j) {
    const int inc = last.iterations[j] - first.iterations[j];
    faster = faster && one_growth > inc;
    increments += std::string(", ") + to_string(r.kinds[j]) + " +" + std::to_string(inc);
  }
  report("6b", faster, "one-level RAS iterations grow faster than every two-level variant", increments);

  // (c)
  SolveConfig solve;
  solve.mesh.generator = MeshGenerator::Voronoi;
  solve.mesh.seeds = 10000;
  solve.mesh.rng_seed = 1;
  solve.grid = {4, 4, 1};
  solve.coarse = CoarseKind::GDSW;
  const SolveSummary s = run_solve(solve, make_mesh(solve.mesh));
  report("6c", s.krylov.converged && s.krylov.iterations >= 15 && s.krylov.iterations <= 33,
         "2D Voronoi 10000 cells, 4x4, GDSW iterations in [15, 33]",
         std::to_string(s.krylov.iterations) + " iterations, coarse dimension " + std::to_string(s.coarse_dimension));

  // Larger members of the same family, for context only.
  const ScalingReport ext = weak_family(true, {5, 6});
  for (const ScalingRow& row : ext.rows) {
    info("beyond the family, n_s^3=" + std::to_string(row.subdomains) + ": one-level " +
         std::to_string(row.one_level_iterations) + ", GDSW/GDSW*/RGDSW " + join(row.iterations));
  }
}

void oracle_equivalence() {
  double worst_apply = 0.0;
  double worst_k0 = 0.0;
  double worst_solve = 0.0;
  int configurations = 0;
  int max_dofs = 0;
  for (int k : {1, 2}) {
    const Scenario s(generate_voronoi_2d(k == 1 ? 900 : 200, 21), k, {2, 2, 1}, 1);
    max_dofs = std::max(max_dofs, s.dofs.num_dofs());
    const Eigen::MatrixXd kd = s.system.K.to_dense();
    const Eigen::Index n = kd.rows();
    const std::vector<double> direct = Factorization::factorize(s.system.K).solve(s.system.b);
    const Eigen::VectorXd xd = Eigen::Map<const Eigen::VectorXd>(direct.data(), n);

    for (int coarse = -1; coarse < 3; ++coarse) {
      std::optional<CoarseBasis> basis;
      Eigen::MatrixXd coarse_part = Eigen::MatrixXd::Zero(n, n);
      if (coarse >= 0) {
        basis = build_coarse_basis(kKinds[coarse], s.system.K, s.partition, s.classification, s.dofs);
        const Eigen::MatrixXd phi = basis->phi.to_dense();
        const Eigen::MatrixXd k0 = phi.transpose() * kd * phi;
        const CoarseOperator op = build_coarse_operator(s.system.K, basis->phi);
        worst_k0 = std::max(worst_k0, (op.k0.to_dense() - k0).cwiseAbs().maxCoeff() / k0.cwiseAbs().maxCoeff());
        coarse_part = phi * k0.llt().solve(phi.transpose());
      }
      for (SchwarzMode mode : {SchwarzMode::AS, SchwarzMode::RAS}) {
        // dense brute force: sum_i P_i (R_i K R_i^T)^{-1} R_i + Phi K0^{-1} Phi^T
        Eigen::MatrixXd m = coarse_part;
        for (int sub = 0; sub < s.partition.num_subdomains; ++sub) {
          const auto& set = s.partition.overlap_dofs[sub];
          const Eigen::Index ni = static_cast<Eigen::Index>(set.size());
          Eigen::MatrixXd r = Eigen::MatrixXd::Zero(ni, n);
          Eigen::MatrixXd p = Eigen::MatrixXd::Zero(ni, n);
          for (Eigen::Index i = 0; i < ni; ++i) {
            r(i, set[i]) = 1.0;
            const int owner = *std::min_element(s.partition.dof_sharing[set[i]].begin(),
                                                s.partition.dof_sharing[set[i]].end());
            if (mode == SchwarzMode::AS || owner == sub) {
              p(i, set[i]) = 1.0;
            }
          }
          m += p.transpose() * (r * kd * r.transpose()).llt().solve(r);
        }
        const SchwarzPreconditioner pre(s.system.K, s.partition, mode, basis ? &basis->phi : nullptr);
        std::mt19937 rng(static_cast<unsigned>(configurations));
        std::normal_distribution<double> normal;
        for (int trial = 0; trial < 5; ++trial) {
          std::vector<double> rv(n);
          for (double& x : rv) {
            x = normal(rng);
          }
          const Eigen::VectorXd expected = m * Eigen::Map<const Eigen::VectorXd>(rv.data(), n);
          const std::vector<double> z = pre.apply(rv);
          const Eigen::VectorXd got = Eigen::Map<const Eigen::VectorXd>(z.data(), n);
          worst_apply = std::max(worst_apply, (got - expected).cwiseAbs().maxCoeff() / expected.cwiseAbs().maxCoeff());
        }
        for (KrylovMethod method : {KrylovMethod::GMRES, KrylovMethod::CG}) {
          if (method == KrylovMethod::CG && mode == SchwarzMode::RAS) {
            continue;
          }
          KrylovConfig config;
          config.method = method;
          const KrylovResult res = krylov_solve(s.system.K, s.system.b, pre, config);
          const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(res.x.data(), n);
          worst_solve = std::max(worst_solve, res.converged ? (x - xd).norm() / xd.norm() : INFINITY);
          ++configurations;
        }
      }
    }
  }
  report("7", worst_apply <= 1e-12 && worst_k0 <= 1e-12,
         "preconditioner and K0 match dense brute force (<= " + std::to_string(max_dofs) + " DOFs, 2x2 subdomains)",
         "max relative deviation: application " + sci(worst_apply) + ", K0 " + sci(worst_k0));
  report("7", worst_solve <= 1e-6, "Krylov solutions match direct solves",
         std::to_string(configurations) + " configurations, max relative difference " + sci(worst_solve));
}

void determinism() {
  const std::string a = weak_family(false).to_csv();
  const std::string b = weak_family(false).to_csv();
  report("8", a == b && !a.empty(), "deterministic weak-scaling CSV identical across two runs",
         std::to_string(a.size()) + " bytes" + (a == b ? ", identical" : ", differ"));
}

} // namespace

int main(int argc, char** argv) {
  std::set<std::string> selected(argv + 1, argv + argc);
  const auto run = [&](const std::string& id, const std::function<void()>& f) {
    if (!selected.empty() && selected.count(id) == 0) {
      return;
    }
    try {
      f();
    } catch (const std::exception& e) {
      report(id, false, "raised an exception", e.what());
    }
  };
  run("1", coarse_dimensions);
  run("2", dof_counts);
  run("3", dimension_identities);
  run("4", partition_of_unity);
  run("5", vem_correctness);
  run("6", iteration_behavior);
  run("7", oracle_equivalence);
  run("8", determinism);
  std::printf("%d failed\n", failures);
  return failures;
}
