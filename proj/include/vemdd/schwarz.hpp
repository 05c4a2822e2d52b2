#pragma once

#include "vemdd/coarse.hpp"
#include "vemdd/decomposition.hpp"
#include "vemdd/linalg.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vemdd {

/// z = M^{-1} r.
class Preconditioner {
public:
  virtual ~Preconditioner() = default;
  [[nodiscard]] virtual int size() const = 0;
  /// True when M^{-1} is symmetric, as required by CG.
  [[nodiscard]] virtual bool symmetric() const = 0;
  virtual void apply(std::span<const double> r, std::span<double> z) const = 0;

  [[nodiscard]] std::vector<double> apply(std::span<const double> r) const;
};

class IdentityPreconditioner final : public Preconditioner {
public:
  explicit IdentityPreconditioner(int n) : n_(n) {}
  [[nodiscard]] int size() const override { return n_; }
  [[nodiscard]] bool symmetric() const override { return true; }
  void apply(std::span<const double> r, std::span<double> z) const override;
  using Preconditioner::apply;

private:
  int n_;
};

enum class SchwarzMode {
  AS, ///< additive: P_i = R_i^T
  RAS ///< restricted additive: P_i keeps only the DOFs owned by subdomain i
};

[[nodiscard]] const char* to_string(SchwarzMode mode);
/// "as" or "ras" (case-insensitive); throws ConfigError.
[[nodiscard]] SchwarzMode parse_schwarz_mode(const std::string& name);

/// One- or two-level overlapping Schwarz preconditioner
///   M^{-1} = Phi K0^{-1} Phi^T + sum_i P_i K_i^{-1} R_i,  K_i = R_i K R_i^T.
/// The coarse level, when present, is always added.
class SchwarzPreconditioner final : public Preconditioner {
public:
  /// `partition` must have overlapping DOF sets (grow_overlap). `phi` is the
  /// coarse basis (free DOFs x N_phi) or null for one level.
  SchwarzPreconditioner(const SparseMatrix& k, const Partition& partition, SchwarzMode mode,
                        const SparseMatrix* phi = nullptr);

  [[nodiscard]] int size() const override { return n_; }
  [[nodiscard]] bool symmetric() const override { return mode_ == SchwarzMode::AS; }
  void apply(std::span<const double> r, std::span<double> z) const override;
  using Preconditioner::apply;

  [[nodiscard]] SchwarzMode mode() const noexcept { return mode_; }
  [[nodiscard]] int levels() const noexcept { return coarse_ ? 2 : 1; }
  [[nodiscard]] int num_subdomains() const noexcept { return static_cast<int>(local_.size()); }
  [[nodiscard]] int coarse_dimension() const noexcept { return coarse_ ? coarse_->k0.rows() : 0; }
  /// Overlapping DOF set R_i.
  [[nodiscard]] const std::vector<int>& local_dofs(int s) const { return local_[s].dofs; }
  /// Local positions of the DOFs owned by subdomain s (RAS prolongation).
  [[nodiscard]] const std::vector<int>& owned_positions(int s) const { return local_[s].owned; }
  [[nodiscard]] const CoarseOperator* coarse() const noexcept { return coarse_ ? &*coarse_ : nullptr; }

private:
  struct Local {
    std::vector<int> dofs;
    std::vector<int> owned;
    Factorization factor;
  };
  int n_;
  SchwarzMode mode_;
  std::vector<Local> local_;
  std::optional<CoarseOperator> coarse_;
  SparseMatrix phi_;
  SparseMatrix phi_t_;
};

/// Owner of each free DOF for the restricted prolongation: the lowest-numbered
/// subdomain whose nonoverlapping closure contains it.
[[nodiscard]] std::vector<int> ras_owners(const Partition& partition);

enum class KrylovMethod { GMRES, CG };

[[nodiscard]] const char* to_string(KrylovMethod method);

struct KrylovConfig {
  KrylovMethod method = KrylovMethod::GMRES;
  double tol = 1e-8;          ///< on ||b - K x|| / ||b||
  int max_iterations = 1000;
  int restart = 200;          ///< GMRES cycle length
  bool reorthogonalize = true; ///< second Gram-Schmidt pass in GMRES

  void validate() const;
};

struct KrylovResult {
  std::vector<double> x;
  int iterations = 0;
  bool converged = false;
  /// Relative unpreconditioned residual after each iteration; entry 0 is the
  /// initial residual.
  std::vector<double> history;

  [[nodiscard]] double final_residual() const { return history.empty() ? 0.0 : history.back(); }
};

/// Left-preconditioned GMRES with modified Gram-Schmidt, started from x = 0.
/// Stops as soon as the true residual ||b - K x|| / ||b|| drops below tol.
/// Non-convergence is reported through `converged`, not thrown.
[[nodiscard]] KrylovResult gmres_solve(const SparseMatrix& k, std::span<const double> b, const Preconditioner& m,
                                       const KrylovConfig& config);

/// Preconditioned conjugate gradients. Throws ConfigError for a
/// nonsymmetric preconditioner (RAS).
[[nodiscard]] KrylovResult cg_solve(const SparseMatrix& k, std::span<const double> b, const Preconditioner& m,
                                    const KrylovConfig& config);

/// Dispatches on config.method.
[[nodiscard]] KrylovResult krylov_solve(const SparseMatrix& k, std::span<const double> b, const Preconditioner& m,
                                        const KrylovConfig& config);

/// "iteration,residual" CSV.
void write_history_csv(const KrylovResult& result, const std::filesystem::path& path);

} // namespace vemdd
