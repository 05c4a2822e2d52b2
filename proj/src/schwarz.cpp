#include "vemdd/schwarz.hpp"

#include "vemdd/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

namespace vemdd {

std::vector<double> Preconditioner::apply(std::span<const double> r) const {
  std::vector<double> z(r.size());
  apply(r, z);
  return z;
}

void IdentityPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  if (r.size() != static_cast<std::size_t>(n_) || z.size() != r.size()) {
    throw ShapeError("preconditioner: vector length mismatch");
  }
  std::copy(r.begin(), r.end(), z.begin());
}

const char* to_string(SchwarzMode mode) { return mode == SchwarzMode::AS ? "AS" : "RAS"; }

SchwarzMode parse_schwarz_mode(const std::string& name) {
  std::string s;
  for (char c : name) {
    s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (s == "as") {
    return SchwarzMode::AS;
  }
  if (s == "ras") {
    return SchwarzMode::RAS;
  }
  throw ConfigError("unknown Schwarz mode '" + name + "' (expected as, ras)");
}

std::vector<int> ras_owners(const Partition& partition) {
  std::vector<int> owner(partition.dof_sharing.size(), -1);
  for (std::size_t i = 0; i < owner.size(); ++i) {
    if (!partition.dof_sharing[i].empty()) {
      owner[i] = partition.dof_sharing[i].front();
    }
  }
  return owner;
}

SchwarzPreconditioner::SchwarzPreconditioner(const SparseMatrix& k, const Partition& partition, SchwarzMode mode,
                                             const SparseMatrix* phi)
    : n_(k.rows()), mode_(mode) {
  if (partition.overlap_levels < 0 || partition.dof_sharing.size() != static_cast<std::size_t>(n_)) {
    throw PartitionError("Schwarz preconditioner needs overlapping DOF sets for this matrix (run grow_overlap)");
  }
  const std::vector<int> owner = ras_owners(partition);
  local_.resize(partition.num_subdomains);
  for (int s = 0; s < partition.num_subdomains; ++s) {
    Local& loc = local_[s];
    loc.dofs = partition.overlap_dofs[s];
    for (std::size_t a = 0; a < loc.dofs.size(); ++a) {
      if (owner[loc.dofs[a]] == s) {
        loc.owned.push_back(static_cast<int>(a));
      }
    }
    try {
      loc.factor = Factorization::factorize(k.submatrix(loc.dofs, loc.dofs));
    } catch (const Error& e) {
      throw SingularMatrixError("local problem of subdomain " + std::to_string(s) + ": " + e.what());
    }
  }
  if (phi != nullptr) {
    if (phi->rows() != n_) {
      throw ShapeError("coarse basis has the wrong number of rows");
    }
    phi_ = *phi;
    phi_t_ = phi->transpose();
    coarse_.emplace(build_coarse_operator(k, *phi));
  }
}

void SchwarzPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  if (r.size() != static_cast<std::size_t>(n_) || z.size() != r.size()) {
    throw ShapeError("preconditioner: vector length mismatch");
  }
  std::fill(z.begin(), z.end(), 0.0);
  std::vector<double> buf;
  for (const Local& loc : local_) {
    buf.resize(loc.dofs.size());
    for (std::size_t a = 0; a < loc.dofs.size(); ++a) {
      buf[a] = r[loc.dofs[a]];
    }
    loc.factor.solve_in_place(buf);
    if (mode_ == SchwarzMode::AS) {
      for (std::size_t a = 0; a < loc.dofs.size(); ++a) {
        z[loc.dofs[a]] += buf[a];
      }
    } else {
      for (int a : loc.owned) {
        z[loc.dofs[a]] += buf[a];
      }
    }
  }
  if (coarse_) {
    std::vector<double> rc = phi_t_.multiply(r);
    coarse_->factor.solve_in_place(rc);
    const std::vector<double> zc = phi_.multiply(rc);
    axpy(1.0, zc, z);
  }
}

const char* to_string(KrylovMethod method) { return method == KrylovMethod::GMRES ? "GMRES" : "CG"; }

void KrylovConfig::validate() const {
  if (!(tol > 0.0)) {
    throw ConfigError("Krylov tolerance must be positive");
  }
  if (max_iterations < 1) {
    throw ConfigError("max_iterations must be >= 1");
  }
  if (restart < 1) {
    throw ConfigError("GMRES restart length must be >= 1");
  }
}

namespace {

void check_sizes(const SparseMatrix& k, std::span<const double> b, const Preconditioner& m) {
  if (k.rows() != k.cols() || b.size() != static_cast<std::size_t>(k.rows()) || m.size() != k.rows()) {
    throw ShapeError("Krylov solve: matrix, right-hand side and preconditioner sizes differ");
  }
}

double relative_residual(const SparseMatrix& k, std::span<const double> b, std::span<const double> x, double bnorm,
                         std::vector<double>& r) {
  k.multiply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = b[i] - r[i];
  }
  return norm2(r) / bnorm;
}

} // namespace

KrylovResult gmres_solve(const SparseMatrix& k, std::span<const double> b, const Preconditioner& m,
                         const KrylovConfig& config) {
  config.validate();
  check_sizes(k, b, m);
  const int n = k.rows();
  KrylovResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    res.converged = true;
    res.history.push_back(0.0);
    return res;
  }
  std::vector<double> r(n);
  std::vector<double> w(n);
  std::vector<double> trial(n);
  double rel = relative_residual(k, b, res.x, bnorm, r);
  res.history.push_back(rel);
  if (rel <= config.tol) {
    res.converged = true;
    return res;
  }
  const int mdim = config.restart;
  std::vector<std::vector<double>> v;
  Eigen::MatrixXd h;
  Eigen::VectorXd g;
  Eigen::VectorXd cs;
  Eigen::VectorXd sn;
  while (res.iterations < config.max_iterations) {
    v.assign(1, std::vector<double>(n));
    m.apply(r, v[0]);
    const double beta = norm2(v[0]);
    if (beta == 0.0) {
      break;
    }
    for (double& x : v[0]) {
      x /= beta;
    }
    h = Eigen::MatrixXd::Zero(mdim + 1, mdim);
    g = Eigen::VectorXd::Zero(mdim + 1);
    cs = Eigen::VectorXd::Zero(mdim);
    sn = Eigen::VectorXd::Zero(mdim);
    g(0) = beta;
    bool restart = false;
    for (int j = 0; j < mdim && res.iterations < config.max_iterations; ++j) {
      k.multiply(v[j], r);
      m.apply(r, w);
      const int passes = config.reorthogonalize ? 2 : 1;
      for (int pass = 0; pass < passes; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const double hij = dot(w, v[i]);
          h(i, j) += hij;
          axpy(-hij, v[i], w);
        }
      }
      const double hnext = norm2(w);
      h(j + 1, j) = hnext;
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * h(i, j) + sn(i) * h(i + 1, j);
        h(i + 1, j) = -sn(i) * h(i, j) + cs(i) * h(i + 1, j);
        h(i, j) = t;
      }
      const double denom = std::hypot(h(j, j), h(j + 1, j));
      cs(j) = h(j, j) / denom;
      sn(j) = h(j + 1, j) / denom;
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      ++res.iterations;

      const Eigen::VectorXd y =
          h.topLeftCorner(j + 1, j + 1).triangularView<Eigen::Upper>().solve(g.head(j + 1));
      trial = res.x;
      for (int i = 0; i <= j; ++i) {
        axpy(y(i), v[i], trial);
      }
      rel = relative_residual(k, b, trial, bnorm, r);
      res.history.push_back(rel);
      if (rel <= config.tol) {
        res.x = trial;
        res.converged = true;
        return res;
      }
      if (hnext == 0.0 || j + 1 == mdim) {
        res.x = trial; // r already holds b - K x for the restart
        restart = true;
        break;
      }
      v.emplace_back(n);
      for (int i = 0; i < n; ++i) {
        v[j + 1][i] = w[i] / hnext;
      }
    }
    if (!restart) {
      break;
    }
  }
  return res;
}

KrylovResult cg_solve(const SparseMatrix& k, std::span<const double> b, const Preconditioner& m,
                      const KrylovConfig& config) {
  config.validate();
  check_sizes(k, b, m);
  if (!m.symmetric()) {
    throw ConfigError("CG requires a symmetric preconditioner; use AS instead of RAS");
  }
  const int n = k.rows();
  KrylovResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    res.converged = true;
    res.history.push_back(0.0);
    return res;
  }
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n);
  std::vector<double> p(n);
  std::vector<double> q(n);
  res.history.push_back(1.0);
  m.apply(r, z);
  p = z;
  double rz = dot(r, z);
  while (res.iterations < config.max_iterations) {
    k.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      break;
    }
    const double alpha = rz / pq;
    axpy(alpha, p, res.x);
    axpy(-alpha, q, r);
    ++res.iterations;
    double rel = norm2(r) / bnorm;
    if (rel <= config.tol) {
      rel = relative_residual(k, b, res.x, bnorm, r); // confirm with the true residual
    }
    res.history.push_back(rel);
    if (rel <= config.tol) {
      res.converged = true;
      break;
    }
    m.apply(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) {
      p[i] = z[i] + beta * p[i];
    }
  }
  return res;
}

KrylovResult krylov_solve(const SparseMatrix& k, std::span<const double> b, const Preconditioner& m,
                          const KrylovConfig& config) {
  return config.method == KrylovMethod::GMRES ? gmres_solve(k, b, m, config) : cg_solve(k, b, m, config);
}

void write_history_csv(const KrylovResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << "iteration,residual\n";
  out.precision(17);
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    out << i << ',' << result.history[i] << '\n';
  }
}

} // namespace vemdd
