// vemdd: mesh generation, single solves, scaling and convergence studies.
#include "vemdd/error.hpp"
#include "vemdd/experiment.hpp"
#include "vemdd/mesh_generators.hpp"
#include "vemdd/mesh_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <map>

namespace {

using namespace vemdd;

constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

struct MeshOptions {
  std::string generator = "box";
  int dim = 2;
  int n = 8;
  std::size_t seeds = 100;
  std::uint64_t rng_seed = 1;
  std::string input;

  void add(CLI::App* app) {
    app->add_option("--dim", dim, "Space dimension")->check(CLI::IsMember({2, 3}))->capture_default_str();
    app->add_option("--generator", generator, "box, voronoi or file")->capture_default_str();
    app->add_option("--n", n, "Cells per axis for box meshes")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seeds", seeds, "Voronoi seed count")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--rng-seed", rng_seed, "Voronoi PRNG seed (mt19937_64)")->capture_default_str();
    app->add_option("--input", input, "Mesh file for --generator file (.vtk or native)");
  }

  [[nodiscard]] MeshSpec spec() const {
    MeshSpec s;
    s.generator = parse_mesh_generator(generator);
    s.dim = dim;
    s.n = n;
    s.seeds = seeds;
    s.rng_seed = rng_seed;
    s.path = input;
    if (s.generator == MeshGenerator::File && input.empty()) {
      throw ConfigError("--generator file needs --input");
    }
    return s;
  }
};

struct SolverOptions {
  int k = 1;
  std::string stabilization = "d-recipe";
  std::string problem = "benchmark";
  int overlap = 1;
  std::string mode = "ras";
  std::string krylov = "gmres";
  double tol = 1e-8;
  int max_iterations = 1000;
  int restart = 200;
  bool no_reorth = false;
  int workers = 1;
  bool deterministic = false;

  void add(CLI::App* app) {
    app->add_option("--k", k, "VEM order (1 or 2)")->capture_default_str();
    app->add_option("--stabilization", stabilization, "d-recipe or dofi-dofi")->capture_default_str();
    app->add_option("--problem", problem, "benchmark, constant, linear or quadratic")->capture_default_str();
    app->add_option("--overlap", overlap, "Overlap in cell layers")->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--mode", mode, "Schwarz mode: ras or as")->capture_default_str();
    app->add_option("--krylov", krylov, "gmres or cg (cg needs --mode as)")->capture_default_str();
    app->add_option("--tol", tol, "Relative residual tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--max-it", max_iterations, "Iteration limit")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--restart", restart, "GMRES restart length")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_flag("--no-reorth", no_reorth, "Single Gram-Schmidt pass in GMRES");
    app->add_option("--workers", workers, "Concurrent rows in studies")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_flag("--deterministic", deterministic, "Sequential execution, no timings in any output");
  }

  [[nodiscard]] SolverSettings settings() const {
    if (k != 1 && k != 2) {
      throw UnsupportedOrderError(k);
    }
    SolverSettings s;
    s.k = k;
    s.stabilization = parse_stabilization(stabilization);
    s.problem = problem;
    (void)builtin_problem(problem, 2); // validates the name early
    s.overlap = overlap;
    s.mode = parse_schwarz_mode(mode);
    if (krylov == "gmres") {
      s.krylov.method = KrylovMethod::GMRES;
    } else if (krylov == "cg") {
      s.krylov.method = KrylovMethod::CG;
    } else {
      throw ConfigError("unknown Krylov method '" + krylov + "' (expected gmres, cg)");
    }
    s.krylov.tol = tol;
    s.krylov.max_iterations = max_iterations;
    s.krylov.restart = restart;
    s.krylov.reorthogonalize = !no_reorth;
    s.krylov.validate();
    s.workers = deterministic ? 1 : workers;
    return s;
  }
};

struct ReportOptions {
  std::string csv;
  std::string markdown;
  std::string svg;

  void add(CLI::App* app) {
    app->add_option("--csv", csv, "CSV report path");
    app->add_option("--markdown", markdown, "Markdown table path");
    app->add_option("--svg", svg, "SVG plot path");
  }
};

std::vector<CoarseKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<CoarseKind> kinds;
  for (const auto& n : names) {
    kinds.push_back(parse_coarse_kind(n));
  }
  return kinds;
}

class Timer {
public:
  explicit Timer(bool quiet) : quiet_(quiet), start_(std::chrono::steady_clock::now()) {}
  void report(const std::string& what) const {
    if (!quiet_) {
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      std::cerr << what << " took " << s << " s\n";
    }
  }

private:
  bool quiet_;
  std::chrono::steady_clock::time_point start_;
};

void emit_scaling(const ScalingReport& report, const ReportOptions& out) {
  std::cout << report.to_markdown();
  if (!out.csv.empty()) {
    write_text(out.csv, report.to_csv());
  }
  if (!out.markdown.empty()) {
    write_text(out.markdown, report.to_markdown());
  }
  if (!out.svg.empty()) {
    std::vector<SvgSeries> series;
    for (std::size_t i = 0; i < report.kinds.size(); ++i) {
      SvgSeries s{to_string(report.kinds[i]), {}, {}};
      for (const auto& row : report.rows) {
        if (row.iterations[i] >= 0) {
          s.x.push_back(row.subdomains);
          s.y.push_back(row.iterations[i]);
        }
      }
      series.push_back(std::move(s));
    }
    if (report.one_level) {
      SvgSeries s{"one-level", {}, {}};
      for (const auto& row : report.rows) {
        if (row.one_level_iterations >= 0) {
          s.x.push_back(row.subdomains);
          s.y.push_back(row.one_level_iterations);
        }
      }
      series.push_back(std::move(s));
    }
    write_text(out.svg, svg_line_plot(report.title, "subdomains", "iterations", series, true));
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual element Poisson solver with two-level overlapping Schwarz preconditioners"};
  app.set_config("--config", "", "TOML/INI configuration file; command-line flags override it");
  app.require_subcommand(1);

  // mesh
  auto* mesh_cmd = app.add_subcommand("mesh", "Generate or convert a mesh, validate it, optionally label a partition");
  MeshOptions mesh_opts;
  mesh_opts.add(mesh_cmd);
  std::string mesh_out;
  std::string mesh_partition;
  mesh_cmd->add_option("--output,-o", mesh_out, "Output path (.vtk or native)")->required();
  mesh_cmd->add_option("--partition", mesh_partition, "Subdomain grid whose labels are written as cell data, e.g. 4x4");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Assemble and solve one problem");
  MeshOptions solve_mesh;
  solve_mesh.add(solve_cmd);
  SolverOptions solve_solver;
  solve_solver.add(solve_cmd);
  std::string solve_grid = "2x2";
  std::string solve_coarse = "gdsw";
  std::string solve_vtk;
  std::string solve_history;
  std::string solve_svg;
  solve_cmd->add_option("--grid", solve_grid, "Subdomain grid, e.g. 4x4 or 2x2x2")->capture_default_str();
  solve_cmd->add_option("--coarse", solve_coarse, "gdsw, gdsw*, rgdsw or none")->capture_default_str();
  solve_cmd->add_option("--vtk", solve_vtk, "Write the solution (vertex values) as VTK");
  solve_cmd->add_option("--history", solve_history, "Residual history CSV");
  solve_cmd->add_option("--svg", solve_svg, "Residual history SVG plot");

  // weak-scaling
  auto* weak_cmd = app.add_subcommand("weak-scaling", "Structured box family with a fixed number of cells per subdomain");
  SolverOptions weak_solver;
  weak_solver.add(weak_cmd);
  ReportOptions weak_out;
  weak_out.add(weak_cmd);
  std::vector<int> weak_ns{2, 3, 4};
  std::vector<int> weak_orders{1};
  std::vector<std::string> weak_kinds{"gdsw", "gdsw*", "rgdsw"};
  int weak_cells = 5;
  int weak_dim = 3;
  bool weak_one_level = false;
  bool weak_dims_only = false;
  weak_cmd->add_option("--ns", weak_ns, "Subdomains per axis")->capture_default_str();
  weak_cmd->add_option("--orders", weak_orders, "VEM orders")->capture_default_str();
  weak_cmd->add_option("--kinds", weak_kinds, "Coarse spaces")->capture_default_str();
  weak_cmd->add_option("--cells-per-subdomain", weak_cells, "Cells per subdomain and axis")->capture_default_str();
  weak_cmd->add_option("--dim", weak_dim, "Space dimension")->check(CLI::IsMember({2, 3}))->capture_default_str();
  weak_cmd->add_flag("--one-level", weak_one_level, "Also run the one-level preconditioner");
  weak_cmd->add_flag("--dims-only", weak_dims_only, "Only count DOFs and coarse dimensions");

  // strong-scaling
  auto* strong_cmd = app.add_subcommand("strong-scaling", "Fixed mesh, several subdomain grids");
  MeshOptions strong_mesh;
  strong_mesh.add(strong_cmd);
  SolverOptions strong_solver;
  strong_solver.add(strong_cmd);
  ReportOptions strong_out;
  strong_out.add(strong_cmd);
  std::vector<std::string> strong_grids{"4x4", "8x8"};
  std::vector<std::string> strong_kinds{"gdsw", "gdsw*", "rgdsw"};
  bool strong_one_level = false;
  strong_cmd->add_option("--grids", strong_grids, "Subdomain grids")->capture_default_str();
  strong_cmd->add_option("--kinds", strong_kinds, "Coarse spaces")->capture_default_str();
  strong_cmd->add_flag("--one-level", strong_one_level, "Also run the one-level preconditioner");

  // convergence
  auto* conv_cmd = app.add_subcommand("convergence", "Discretization errors and observed rates on a mesh family");
  MeshOptions conv_mesh;
  conv_mesh.add(conv_cmd);
  ReportOptions conv_out;
  conv_out.add(conv_cmd);
  std::vector<int> conv_sizes{8, 16, 32, 64};
  int conv_k = 1;
  std::string conv_stab = "d-recipe";
  std::string conv_problem = "benchmark";
  conv_cmd->add_option("--sizes", conv_sizes, "Cells per axis (box) or seed counts (voronoi)")->capture_default_str();
  conv_cmd->add_option("--k", conv_k, "VEM order (1 or 2)")->capture_default_str();
  conv_cmd->add_option("--stabilization", conv_stab, "d-recipe or dofi-dofi")->capture_default_str();
  conv_cmd->add_option("--problem", conv_problem, "Built-in problem")->capture_default_str();

  // A [subcommand] section in the config file selects that subcommand.
  for (CLI::App* sub : {mesh_cmd, solve_cmd, weak_cmd, strong_cmd, conv_cmd}) {
    sub->configurable();
  }
  CLI11_PARSE(app, argc, argv);

  try {
    if (mesh_cmd->parsed()) {
      const PolyMesh mesh = make_mesh(mesh_opts.spec());
      const MeshReport report = validate_mesh(mesh);
      std::cout << "cells " << mesh.num_cells() << ", vertices " << mesh.num_vertices() << ", edges "
                << mesh.num_edges();
      if (mesh.dim() == 3) {
        std::cout << ", faces " << mesh.num_faces();
      }
      std::cout << "\nvalidation: " << (report.ok() ? "ok" : "violations") << '\n';
      for (const auto& v : report.violations) {
        std::cout << "  " << to_string(v.kind) << ": " << v.message << '\n';
      }
      VtkFields fields;
      if (!mesh_partition.empty()) {
        const Partition p = partition_geometric(mesh, parse_grid(mesh_partition, mesh.dim()));
        fields.cell_labels.emplace_back("subdomain", p.cell_subdomain);
      }
      export_mesh(mesh, mesh_out, format_from_path(mesh_out), fields);
      return report.ok() ? 0 : kExitError;
    }

    if (solve_cmd->parsed()) {
      SolveConfig cfg;
      cfg.mesh = solve_mesh.spec();
      cfg.settings = solve_solver.settings();
      if (solve_coarse == "none") {
        cfg.coarse.reset();
      } else {
        cfg.coarse = parse_coarse_kind(solve_coarse);
      }
      const Timer timer(solve_solver.deterministic);
      const PolyMesh mesh = make_mesh(cfg.mesh);
      cfg.grid = parse_grid(solve_grid, mesh.dim());
      const SolveSummary s = run_solve(cfg, mesh);
      std::cout << "mesh: " << cfg.mesh.describe() << ", " << s.num_cells << " cells\n"
                << "k=" << cfg.settings.k << ", DOFs " << s.num_dofs << " (" << s.num_free << " free)\n"
                << "subdomains " << s.num_subdomains << " (" << solve_grid << "), interface components V="
                << s.counts.vertices << " E=" << s.counts.edges << " F=" << s.counts.faces << '\n'
                << "coarse " << (cfg.coarse ? to_string(*cfg.coarse) : "none") << ", dimension "
                << s.coarse_dimension;
      if (s.promoted_orphans > 0) {
        std::cout << " (" << s.promoted_orphans << " orphan components promoted)";
      }
      std::cout << '\n'
                << to_string(cfg.settings.krylov.method) << " + " << to_string(cfg.settings.mode) << ": "
                << (s.krylov.converged ? "converged" : "NOT converged") << " in " << s.krylov.iterations
                << " iterations, relative residual " << s.krylov.final_residual() << '\n'
                << "errors: L2 " << s.errors.l2 << ", H1 " << s.errors.h1 << '\n';
      timer.report("solve");
      if (!solve_history.empty() || !s.krylov.converged) {
        const std::string path = solve_history.empty() ? "residual_history.csv" : solve_history;
        write_history_csv(s.krylov, path);
        if (!s.krylov.converged) {
          std::cerr << "residual history written to " << path << '\n';
        }
      }
      if (!solve_svg.empty()) {
        SvgSeries series{"residual", {}, s.krylov.history};
        for (std::size_t i = 0; i < series.y.size(); ++i) {
          series.x.push_back(static_cast<double>(i));
        }
        write_text(solve_svg, svg_line_plot("Residual history", "iteration", "relative residual", {series}, false));
      }
      if (!solve_vtk.empty()) {
        std::vector<double> vertex_values(s.solution.begin(), s.solution.begin() + mesh.num_vertices());
        VtkFields fields;
        fields.point_scalars.emplace_back("u_h", std::move(vertex_values));
        export_mesh(mesh, solve_vtk, MeshFormat::Vtk, fields);
      }
      return s.krylov.converged ? 0 : kExitNotConverged;
    }

    if (weak_cmd->parsed()) {
      WeakScalingConfig cfg;
      cfg.subdomains_per_axis = weak_ns;
      cfg.orders = weak_orders;
      for (int k : cfg.orders) {
        if (k != 1 && k != 2) {
          throw UnsupportedOrderError(k);
        }
      }
      cfg.kinds = parse_kinds(weak_kinds);
      cfg.cells_per_subdomain_axis = weak_cells;
      cfg.dim = weak_dim;
      cfg.one_level = weak_one_level;
      cfg.dimensions_only = weak_dims_only;
      cfg.settings = weak_solver.settings();
      const Timer timer(weak_solver.deterministic);
      const ScalingReport report = run_weak_scaling(cfg);
      emit_scaling(report, weak_out);
      timer.report("weak scaling");
      return report.all_converged() ? 0 : kExitNotConverged;
    }

    if (strong_cmd->parsed()) {
      StrongScalingConfig cfg;
      cfg.mesh = strong_mesh.spec();
      cfg.grids.clear();
      for (const auto& g : strong_grids) {
        cfg.grids.push_back(parse_grid(g, cfg.mesh.dim));
      }
      cfg.kinds = parse_kinds(strong_kinds);
      cfg.one_level = strong_one_level;
      cfg.settings = strong_solver.settings();
      const Timer timer(strong_solver.deterministic);
      const ScalingReport report = run_strong_scaling(cfg);
      emit_scaling(report, strong_out);
      timer.report("strong scaling");
      return report.all_converged() ? 0 : kExitNotConverged;
    }

    if (conv_cmd->parsed()) {
      if (conv_k != 1 && conv_k != 2) {
        throw UnsupportedOrderError(conv_k);
      }
      ConvergenceConfig cfg;
      cfg.mesh = conv_mesh.spec();
      cfg.sizes = conv_sizes;
      cfg.k = conv_k;
      cfg.stabilization = parse_stabilization(conv_stab);
      cfg.problem = conv_problem;
      const ConvergenceReport report = run_convergence(cfg);
      std::cout << report.to_markdown();
      if (!conv_out.csv.empty()) {
        write_text(conv_out.csv, report.to_csv());
      }
      if (!conv_out.markdown.empty()) {
        write_text(conv_out.markdown, report.to_markdown());
      }
      if (!conv_out.svg.empty()) {
        SvgSeries l2{"L2", {}, {}};
        SvgSeries h1{"H1", {}, {}};
        for (const auto& r : report.rows) {
          l2.x.push_back(r.h);
          l2.y.push_back(r.errors.l2);
          h1.x.push_back(r.h);
          h1.y.push_back(r.errors.h1);
        }
        write_text(conv_out.svg, svg_line_plot(report.title, "h", "error", {l2, h1}, true));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
