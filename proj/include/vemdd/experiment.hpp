#pragma once

#include "vemdd/coarse.hpp"
#include "vemdd/decomposition.hpp"
#include "vemdd/problems.hpp"
#include "vemdd/schwarz.hpp"
#include "vemdd/vem.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vemdd {

enum class MeshGenerator { Box, Voronoi, File };

struct MeshSpec {
  MeshGenerator generator = MeshGenerator::Box;
  int dim = 2;
  int n = 8;                   ///< cells per axis (Box)
  std::size_t seeds = 100;     ///< Voronoi seeds
  std::uint64_t rng_seed = 1;  ///< Voronoi PRNG seed
  std::filesystem::path path;  ///< File

  [[nodiscard]] std::string describe() const;
};

/// "box", "voronoi" or "file"; throws ConfigError.
[[nodiscard]] MeshGenerator parse_mesh_generator(const std::string& name);
[[nodiscard]] Stabilization parse_stabilization(const std::string& name);
[[nodiscard]] const char* to_string(Stabilization stab);
/// "4x4" or "4x4x4"; throws ConfigError.
[[nodiscard]] std::array<int, 3> parse_grid(const std::string& text, int dim);
[[nodiscard]] std::string grid_string(const std::array<int, 3>& grid, int dim);

[[nodiscard]] PolyMesh make_mesh(const MeshSpec& spec);

/// Shared discretization and solver settings.
struct SolverSettings {
  int k = 1;
  Stabilization stabilization = Stabilization::DRecipe;
  std::string problem = "benchmark";
  int overlap = 1;
  SchwarzMode mode = SchwarzMode::RAS;
  KrylovConfig krylov;
  /// Independent rows of a study run concurrently up to this many threads.
  /// Each row is computed sequentially, so reports do not depend on it.
  int workers = 1;
};

struct InterfaceCounts {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t faces = 0;
};

/// Coarse dimension each kind would have, from the component counts
/// (orphans promoted under the vertex-based kinds add to these).
[[nodiscard]] int coarse_dimension_identity(CoarseKind kind, const InterfaceCounts& counts, int dim);

struct SolveConfig {
  MeshSpec mesh;
  std::array<int, 3> grid{2, 2, 1};
  std::optional<CoarseKind> coarse = CoarseKind::GDSW; ///< none: one-level
  SolverSettings settings;
};

struct SolveSummary {
  int num_cells = 0;
  int num_dofs = 0;
  int num_free = 0;
  int num_subdomains = 0;
  InterfaceCounts counts;
  int coarse_dimension = 0;
  std::size_t promoted_orphans = 0;
  KrylovResult krylov;
  ErrorNorms errors;
  std::vector<double> solution; ///< global DOF vector
};

/// Assemble, partition, build the preconditioner, solve, measure errors.
[[nodiscard]] SolveSummary run_solve(const SolveConfig& config, const PolyMesh& mesh);

struct ScalingRow {
  int subdomains = 0;
  std::string grid;
  int k = 1;
  long dofs = 0;
  InterfaceCounts counts;
  std::vector<int> coarse_dims;  ///< per kind in ScalingReport::kinds
  std::vector<int> iterations;   ///< per kind; -1 when not converged, -2 when not run
  int one_level_iterations = -2; ///< -2 when not run, -1 when not converged
  std::string failure;           ///< non-empty when a solve in the row failed
};

struct ScalingReport {
  std::string title;
  std::vector<CoarseKind> kinds;
  bool one_level = false;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<ScalingRow> rows;

  [[nodiscard]] bool all_converged() const;
  [[nodiscard]] std::string to_csv() const;
  [[nodiscard]] std::string to_markdown() const;
};

struct WeakScalingConfig {
  std::vector<int> subdomains_per_axis{2, 3, 4};
  int cells_per_subdomain_axis = 5;
  int dim = 3;
  std::vector<int> orders{1};
  std::vector<CoarseKind> kinds{CoarseKind::GDSW, CoarseKind::GDSWStar, CoarseKind::RGDSW};
  bool one_level = false;
  /// Count DOFs and coarse dimensions only; skip assembly and solves.
  bool dimensions_only = false;
  SolverSettings settings;
};

/// Structured box with (cells_per_subdomain_axis * n_s)^dim cells split into
/// n_s^dim subdomains, for every n_s and order. Throws Error if a row breaks
/// the coarse dimension identities.
[[nodiscard]] ScalingReport run_weak_scaling(const WeakScalingConfig& config);

struct StrongScalingConfig {
  MeshSpec mesh;
  std::vector<std::array<int, 3>> grids{{4, 4, 1}, {8, 8, 1}};
  std::vector<CoarseKind> kinds{CoarseKind::GDSW, CoarseKind::GDSWStar, CoarseKind::RGDSW};
  bool one_level = false;
  SolverSettings settings;
};

[[nodiscard]] ScalingReport run_strong_scaling(const StrongScalingConfig& config);

struct ConvergenceRow {
  int n = 0;
  double h = 0.0; ///< largest cell diameter
  long dofs = 0;
  ErrorNorms errors;
  double rate_l2 = 0.0; ///< 0 on the first row
  double rate_h1 = 0.0;
};

struct ConvergenceReport {
  std::string title;
  std::vector<ConvergenceRow> rows;

  [[nodiscard]] std::string to_csv() const;
  [[nodiscard]] std::string to_markdown() const;
};

struct ConvergenceConfig {
  MeshSpec mesh; ///< n (Box) or seeds (Voronoi) is replaced by each entry of sizes
  std::vector<int> sizes{8, 16, 32, 64};
  int k = 1;
  Stabilization stabilization = Stabilization::DRecipe;
  std::string problem = "benchmark";
};

/// Direct solves on a mesh sequence; rates are log(e_{i-1}/e_i)/log(h_{i-1}/h_i).
[[nodiscard]] ConvergenceReport run_convergence(const ConvergenceConfig& config);

/// Minimal SVG line chart with logarithmic y axis (and optionally x axis).
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};
[[nodiscard]] std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                                        const std::vector<SvgSeries>& series, bool log_x);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace vemdd
