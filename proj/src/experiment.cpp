#include "vemdd/experiment.hpp"

#include "vemdd/error.hpp"
#include "vemdd/mesh_generators.hpp"
#include "vemdd/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <sstream>

namespace vemdd {

namespace {

std::string lower(const std::string& s) {
  std::string out;
  for (char c : s) {
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Shortest round-trip formatting, so CSV output is bitwise reproducible.
std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

InterfaceCounts count_components(const InterfaceClassification& cl) {
  return {cl.count(ComponentType::Vertex), cl.count(ComponentType::Edge), cl.count(ComponentType::Face)};
}

} // namespace

std::string MeshSpec::describe() const {
  switch (generator) {
  case MeshGenerator::Box:
    return std::string(dim == 2 ? "quad " : "hex ") + std::to_string(n) + "^" + std::to_string(dim);
  case MeshGenerator::Voronoi:
    return "voronoi " + std::to_string(seeds) + " seeds (rng " + std::to_string(rng_seed) + ")";
  case MeshGenerator::File:
    return "file " + path.string();
  }
  return "?";
}

MeshGenerator parse_mesh_generator(const std::string& name) {
  const std::string s = lower(name);
  if (s == "box" || s == "structured") {
    return MeshGenerator::Box;
  }
  if (s == "voronoi") {
    return MeshGenerator::Voronoi;
  }
  if (s == "file") {
    return MeshGenerator::File;
  }
  throw ConfigError("unknown mesh generator '" + name + "' (expected box, voronoi, file)");
}

Stabilization parse_stabilization(const std::string& name) {
  const std::string s = lower(name);
  if (s == "d-recipe" || s == "drecipe") {
    return Stabilization::DRecipe;
  }
  if (s == "dofi-dofi" || s == "dofidofi") {
    return Stabilization::DofiDofi;
  }
  throw ConfigError("unknown stabilization '" + name + "' (expected d-recipe, dofi-dofi)");
}

const char* to_string(Stabilization stab) { return stab == Stabilization::DRecipe ? "d-recipe" : "dofi-dofi"; }

std::array<int, 3> parse_grid(const std::string& text, int dim) {
  std::array<int, 3> grid{1, 1, 1};
  int count = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = std::min(text.find_first_of("xX", pos), text.size());
    const std::string part = text.substr(pos, next - pos);
    int value = 0;
    const auto r = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || r.ec != std::errc() || r.ptr != part.data() + part.size() || value < 1 || count >= 3) {
      throw ConfigError("malformed subdomain grid '" + text + "' (expected e.g. 4x4 or 4x4x4)");
    }
    grid[count++] = value;
    pos = next + 1;
  }
  if (count != dim) {
    throw ConfigError("subdomain grid '" + text + "' does not match dimension " + std::to_string(dim));
  }
  return grid;
}

std::string grid_string(const std::array<int, 3>& grid, int dim) {
  std::string s = std::to_string(grid[0]) + "x" + std::to_string(grid[1]);
  if (dim == 3) {
    s += "x" + std::to_string(grid[2]);
  }
  return s;
}

PolyMesh make_mesh(const MeshSpec& spec) {
  switch (spec.generator) {
  case MeshGenerator::Box:
    if (spec.n < 1 || (spec.dim != 2 && spec.dim != 3)) {
      throw ConfigError("box mesh needs n >= 1 and dim 2 or 3");
    }
    return generate_structured_box(spec.dim, spec.n);
  case MeshGenerator::Voronoi:
    if (spec.dim != 2) {
      throw ConfigError("Voronoi meshes are generated in 2D only; import 3D polyhedral meshes from a file");
    }
    if (spec.seeds < 1) {
      throw ConfigError("Voronoi mesh needs at least one seed");
    }
    return generate_voronoi_2d(spec.seeds, spec.rng_seed);
  case MeshGenerator::File:
    if (!std::filesystem::exists(spec.path)) {
      throw ConfigError("mesh file '" + spec.path.string() + "' does not exist");
    }
    return import_mesh(spec.path, format_from_path(spec.path));
  }
  throw ConfigError("unknown mesh generator");
}

int coarse_dimension_identity(CoarseKind kind, const InterfaceCounts& c, int dim) {
  const auto v = static_cast<int>(c.vertices);
  const auto e = static_cast<int>(c.edges);
  const auto f = static_cast<int>(c.faces);
  switch (kind) {
  case CoarseKind::GDSW:
    return v + e + f;
  case CoarseKind::GDSWStar:
    return dim == 2 ? v : v + f;
  case CoarseKind::RGDSW:
    return v;
  }
  return 0;
}

SolveSummary run_solve(const SolveConfig& config, const PolyMesh& mesh) {
  const SolverSettings& s = config.settings;
  const Problem problem = builtin_problem(s.problem, mesh.dim());
  const DofMap dofs(mesh, s.k);
  const AssembledSystem sys = assemble(mesh, dofs, problem.f, problem.u, s.stabilization);
  Partition partition = partition_geometric(mesh, config.grid);
  grow_overlap(partition, mesh, dofs, s.overlap);
  const InterfaceClassification cl = classify_interface(partition, dofs);

  SolveSummary out;
  out.num_cells = static_cast<int>(mesh.num_cells());
  out.num_dofs = dofs.num_dofs();
  out.num_free = dofs.num_free();
  out.num_subdomains = partition.num_subdomains;
  out.counts = count_components(cl);

  std::optional<CoarseBasis> basis;
  if (config.coarse) {
    basis = build_coarse_basis(*config.coarse, sys.K, partition, cl, dofs);
    out.coarse_dimension = basis->size();
    out.promoted_orphans = basis->promoted_orphans.size();
  }
  const SchwarzPreconditioner prec(sys.K, partition, s.mode, basis ? &basis->phi : nullptr);
  out.krylov = krylov_solve(sys.K, sys.b, prec, s.krylov);
  out.solution = sys.expand(out.krylov.x);
  out.errors = compute_errors(mesh, dofs, out.solution, problem.u, problem.grad_u);
  return out;
}

// ---------------------------------------------------------------------------
// Scaling studies

namespace {

void check_identities(const ScalingRow& row, const std::vector<CoarseKind>& kinds, int dim,
                      const std::vector<std::size_t>& orphans) {
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const int expected = coarse_dimension_identity(kinds[i], row.counts, dim) + static_cast<int>(orphans[i]);
    if (row.coarse_dims[i] != expected) {
      throw Error(std::string("coarse dimension identity violated for ") + to_string(kinds[i]) + " on " + row.grid +
                  ": got " + std::to_string(row.coarse_dims[i]) + ", expected " + std::to_string(expected));
    }
  }
}

// Fills one row: dimensions always, iterations unless dims_only.
ScalingRow scaling_row(const PolyMesh& mesh, const std::array<int, 3>& grid, const std::vector<CoarseKind>& kinds,
                       bool one_level, bool dims_only, const SolverSettings& s) {
  ScalingRow row;
  row.k = s.k;
  row.grid = grid_string(grid, mesh.dim());
  const DofMap dofs(mesh, s.k);
  row.dofs = dofs.num_dofs();
  Partition partition = partition_geometric(mesh, grid);
  row.subdomains = partition.num_subdomains;
  std::vector<std::size_t> orphans;
  if (dims_only) {
    assign_dofs(partition, dofs);
    const InterfaceClassification cl = classify_interface(partition, dofs);
    row.counts = count_components(cl);
    for (CoarseKind kind : kinds) {
      const CoarseBasis b = interface_values(kind, cl, dofs);
      row.coarse_dims.push_back(b.size());
      row.iterations.push_back(-2);
      orphans.push_back(b.promoted_orphans.size());
    }
    check_identities(row, kinds, mesh.dim(), orphans);
    return row;
  }
  const Problem problem = builtin_problem(s.problem, mesh.dim());
  const AssembledSystem sys = assemble(mesh, dofs, problem.f, problem.u, s.stabilization);
  grow_overlap(partition, mesh, dofs, s.overlap);
  const InterfaceClassification cl = classify_interface(partition, dofs);
  row.counts = count_components(cl);
  for (CoarseKind kind : kinds) {
    const CoarseBasis b = build_coarse_basis(kind, sys.K, partition, cl, dofs);
    row.coarse_dims.push_back(b.size());
    orphans.push_back(b.promoted_orphans.size());
    const SchwarzPreconditioner prec(sys.K, partition, s.mode, &b.phi);
    const KrylovResult r = krylov_solve(sys.K, sys.b, prec, s.krylov);
    row.iterations.push_back(r.converged ? r.iterations : -1);
    if (!r.converged) {
      row.failure += std::string(row.failure.empty() ? "" : "; ") + to_string(kind) + " did not converge";
    }
  }
  check_identities(row, kinds, mesh.dim(), orphans);
  if (one_level) {
    const SchwarzPreconditioner prec(sys.K, partition, s.mode);
    const KrylovResult r = krylov_solve(sys.K, sys.b, prec, s.krylov);
    row.one_level_iterations = r.converged ? r.iterations : -1;
    if (!r.converged) {
      row.failure += std::string(row.failure.empty() ? "" : "; ") + "one-level did not converge";
    }
  }
  return row;
}

std::vector<std::pair<std::string, std::string>> settings_metadata(const SolverSettings& s) {
  return {{"problem", s.problem},
          {"stabilization", to_string(s.stabilization)},
          {"overlap", std::to_string(s.overlap)},
          {"mode", to_string(s.mode)},
          {"krylov", to_string(s.krylov.method)},
          {"tol", fmt(s.krylov.tol)}};
}

// Evaluates jobs in order, up to `workers` at a time; results keep job order.
std::vector<ScalingRow> run_rows(const std::vector<std::function<ScalingRow()>>& jobs, int workers) {
  std::vector<ScalingRow> rows;
  rows.reserve(jobs.size());
  const std::size_t batch = static_cast<std::size_t>(std::max(workers, 1));
  for (std::size_t start = 0; start < jobs.size(); start += batch) {
    const std::size_t end = std::min(jobs.size(), start + batch);
    if (batch == 1) {
      rows.push_back(jobs[start]());
      continue;
    }
    std::vector<std::future<ScalingRow>> futures;
    for (std::size_t j = start; j < end; ++j) {
      futures.push_back(std::async(std::launch::async, jobs[j]));
    }
    for (auto& f : futures) {
      rows.push_back(f.get());
    }
  }
  return rows;
}

std::string csv_iterations(int it) { return it == -2 ? std::string() : std::to_string(it); }

std::string iteration_cell(int it) { return it >= 0 ? std::to_string(it) : (it == -1 ? "n/c" : "-"); }

} // namespace

ScalingReport run_weak_scaling(const WeakScalingConfig& config) {
  ScalingReport report;
  report.title = "Weak scaling, structured box, " + std::to_string(config.cells_per_subdomain_axis) +
                 " cells per subdomain and axis";
  report.kinds = config.kinds;
  report.one_level = config.one_level && !config.dimensions_only;
  report.metadata = settings_metadata(config.settings);
  report.metadata.emplace_back("dim", std::to_string(config.dim));
  std::vector<std::function<ScalingRow()>> jobs;
  for (int k : config.orders) {
    for (int ns : config.subdomains_per_axis) {
      if (ns < 1) {
        throw ConfigError("subdomains per axis must be >= 1");
      }
      SolverSettings s = config.settings;
      s.k = k;
      jobs.emplace_back([&config, &report, ns, s] {
        const PolyMesh mesh = generate_structured_box(config.dim, config.cells_per_subdomain_axis * ns);
        const std::array<int, 3> grid{ns, ns, config.dim == 3 ? ns : 1};
        return scaling_row(mesh, grid, config.kinds, report.one_level, config.dimensions_only, s);
      });
    }
  }
  report.rows = run_rows(jobs, config.settings.workers);
  return report;
}

ScalingReport run_strong_scaling(const StrongScalingConfig& config) {
  ScalingReport report;
  const PolyMesh mesh = make_mesh(config.mesh);
  report.title = "Strong scaling, " + config.mesh.describe();
  report.kinds = config.kinds;
  report.one_level = config.one_level;
  report.metadata = settings_metadata(config.settings);
  report.metadata.emplace_back("k", std::to_string(config.settings.k));
  std::vector<std::function<ScalingRow()>> jobs;
  for (const auto& grid : config.grids) {
    jobs.emplace_back([&, grid] { return scaling_row(mesh, grid, config.kinds, config.one_level, false, config.settings); });
  }
  report.rows = run_rows(jobs, config.settings.workers);
  return report;
}

bool ScalingReport::all_converged() const {
  return std::all_of(rows.begin(), rows.end(), [](const ScalingRow& r) { return r.failure.empty(); });
}

std::string ScalingReport::to_csv() const {
  std::ostringstream os;
  os << "subdomains,grid,k,dofs,vertices,edges,faces";
  for (CoarseKind kind : kinds) {
    os << ",coarse_" << to_string(kind) << ",it_" << to_string(kind);
  }
  if (one_level) {
    os << ",it_one_level";
  }
  os << ",status\n";
  for (const auto& r : rows) {
    os << r.subdomains << ',' << r.grid << ',' << r.k << ',' << r.dofs << ',' << r.counts.vertices << ','
       << r.counts.edges << ',' << r.counts.faces;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      os << ',' << r.coarse_dims[i] << ',' << csv_iterations(r.iterations[i]);
    }
    if (one_level) {
      os << ',' << csv_iterations(r.one_level_iterations);
    }
    os << ',' << (r.failure.empty() ? "ok" : r.failure) << '\n';
  }
  return os.str();
}

std::string ScalingReport::to_markdown() const {
  std::ostringstream os;
  os << "## " << title << "\n\n";
  for (const auto& [key, value] : metadata) {
    os << "- " << key << ": " << value << '\n';
  }
  os << "\n| subdomains | k | Dofs |";
  for (CoarseKind kind : kinds) {
    os << ' ' << to_string(kind) << " coarse | it |";
  }
  if (one_level) {
    os << " one-level it |";
  }
  os << "\n|---|---|---|";
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    os << "---|---|";
  }
  if (one_level) {
    os << "---|";
  }
  os << '\n';
  for (const auto& r : rows) {
    os << "| " << r.subdomains << " | " << r.k << " | " << r.dofs << " |";
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      os << ' ' << r.coarse_dims[i] << " | " << iteration_cell(r.iterations[i]) << " |";
    }
    if (one_level) {
      os << ' ' << iteration_cell(r.one_level_iterations) << " |";
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Convergence study

ConvergenceReport run_convergence(const ConvergenceConfig& config) {
  ConvergenceReport report;
  report.title = "Convergence, k=" + std::to_string(config.k) + ", problem " + config.problem;
  for (int size : config.sizes) {
    MeshSpec spec = config.mesh;
    if (spec.generator == MeshGenerator::Voronoi) {
      spec.seeds = static_cast<std::size_t>(size);
    } else if (spec.generator == MeshGenerator::Box) {
      spec.n = size;
    } else {
      throw ConfigError("convergence studies need a generated mesh family");
    }
    const PolyMesh mesh = make_mesh(spec);
    const Problem problem = builtin_problem(config.problem, mesh.dim());
    const DofMap dofs(mesh, config.k);
    const AssembledSystem sys = assemble(mesh, dofs, problem.f, problem.u, config.stabilization);
    const Factorization factor = Factorization::factorize(sys.K);
    const std::vector<double> uh = sys.expand(factor.solve(sys.b));
    ConvergenceRow row;
    row.n = size;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      row.h = std::max(row.h, cell_diameter(mesh, c));
    }
    row.dofs = dofs.num_dofs();
    row.errors = compute_errors(mesh, dofs, uh, problem.u, problem.grad_u);
    if (!report.rows.empty()) {
      const auto& prev = report.rows.back();
      const double lh = std::log(prev.h / row.h);
      row.rate_l2 = std::log(prev.errors.l2 / row.errors.l2) / lh;
      row.rate_h1 = std::log(prev.errors.h1 / row.errors.h1) / lh;
    }
    report.rows.push_back(row);
  }
  return report;
}

std::string ConvergenceReport::to_csv() const {
  std::ostringstream os;
  os << "n,h,dofs,l2,h1,rate_l2,rate_h1\n";
  for (const auto& r : rows) {
    os << r.n << ',' << fmt(r.h) << ',' << r.dofs << ',' << fmt(r.errors.l2) << ',' << fmt(r.errors.h1) << ','
       << fmt(r.rate_l2) << ',' << fmt(r.rate_h1) << '\n';
  }
  return os.str();
}

std::string ConvergenceReport::to_markdown() const {
  std::ostringstream os;
  os << "## " << title << "\n\n| n | h | Dofs | L2 error | rate | H1 error | rate |\n|---|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << "| " << r.n << " | " << fixed(r.h, 4) << " | " << r.dofs << " | " << fixed(r.errors.l2, 4) << " | "
       << (i == 0 ? "-" : fixed(r.rate_l2, 3)) << " | " << fixed(r.errors.h1, 4) << " | "
       << (i == 0 ? "-" : fixed(r.rate_h1, 3)) << " |\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Output helpers

std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<SvgSeries>& series, bool log_x) {
  constexpr double W = 640;
  constexpr double H = 420;
  constexpr double L = 70;
  constexpr double R = 150;
  constexpr double T = 40;
  constexpr double B = 50;
  auto tx = [log_x](double x) { return log_x ? std::log10(x) : x; };
  double x0 = 1e300;
  double x1 = -1e300;
  double y0 = 1e300;
  double y1 = -1e300;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (s.y[i] > 0.0 && (!log_x || s.x[i] > 0.0)) {
        x0 = std::min(x0, tx(s.x[i]));
        x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, std::log10(s.y[i]));
        y1 = std::max(y1, std::log10(s.y[i]));
      }
    }
  }
  if (x0 > x1) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 == x0) {
    x1 = x0 + 1;
  }
  y0 = std::floor(y0);
  y1 = std::ceil(y1);
  if (y1 == y0) {
    y1 = y0 + 1;
  }
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (std::log10(y) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(y0); e <= static_cast<int>(y1); ++e) {
    const double y = py(std::pow(10.0, e));
    os << "<text x=\"" << L - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\" font-size=\"11\">1e" << e
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
     << ")\" text-anchor=\"middle\" font-size=\"12\">" << ylabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (s.y[i] > 0.0 && (!log_x || s.x[i] > 0.0)) {
        os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      }
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" font-size=\"12\" fill=\"" << color
       << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << text;
}

} // namespace vemdd
