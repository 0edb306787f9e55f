#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "nozzleflow/farfield.hpp"
#include "nozzleflow/gas.hpp"
#include "nozzleflow/geometry.hpp"
#include "nozzleflow/profiles.hpp"

namespace nozzleflow {

enum class FaceBcMode { farfield, wallformula };

struct SolverConfig {
  double epsilon = 0.0;        // cut-off margin; <= 0 selects the automatic scale
  double tol_update = 1e-9;    // outer stop, relative to m (max-norm of update)
  // Outer stop on the assembled (weak-form) residual max-norm;
  // <= 0 selects 1e-8 * m / domain area.
  double tol_residual = 0.0;
  int max_picard = 200;
  double relaxation = 0.7;     // under-relaxation of the outer fixed point
  double linear_tol = 1e-12;   // inner CG relative residual
  int linear_max_iter = 50000;
  FaceBcMode face_bc = FaceBcMode::farfield;

  void validate() const {
    if (!(tol_update > 0.0) || !(linear_tol > 0.0))
      throw std::domain_error("SolverConfig: tolerances must be positive");
    if (!(relaxation > 0.0 && relaxation <= 1.0))
      throw std::domain_error("SolverConfig: relaxation must lie in (0, 1]");
    if (max_picard < 1 || linear_max_iter < 1)
      throw std::domain_error("SolverConfig: iteration caps must be positive");
  }
};

struct PicardLog {
  int iteration;
  double update;
  double residual;
  int cutoff_cells;
};

// Discrete stream function on the flattened truncated domain.
struct StreamField {
  FlattenedDomain grid;
  double m = 0.0;
  Eigen::ArrayXXd values;  // (ny, nx), column i holds one t1 station
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;
  bool cutoff_active = false;
  double epsilon = 0.0;     // cut-off margin the solve ran with
  double max_margin = 0.0;  // sup of the regularized subsonicity margin
  double ritz_min = 0.0;    // smallest inner-solve Ritz estimate seen
  std::vector<PicardLog> history;
};

class picard_error : public std::runtime_error {
 public:
  picard_error(const std::string& msg, StreamField last)
      : std::runtime_error(msg), last_(std::move(last)) {}
  const StreamField& last_field() const { return last_; }

 private:
  StreamField last_;
};

class inner_solve_error : public std::runtime_error {
 public:
  inner_solve_error(const std::string& msg, std::vector<double> history)
      : std::runtime_error(msg), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

struct PcgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double rel_residual = 0.0;
  std::vector<double> residual_history;
  double ritz_min = 0.0;  // Lanczos estimates of the preconditioned spectrum
  double ritz_max = 0.0;
};

// Jacobi-preconditioned conjugate gradients for symmetric positive definite
// systems. Stops at ||r|| <= max(tol * ||b||, abs_tol). Throws
// inner_solve_error on stagnation past max_iter and when a direction of
// nonpositive curvature reveals an indefinite matrix.
PcgResult pcg_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& x0, double tol, int max_iter,
                    double abs_tol = 0.0);

// Frozen-coefficient linear system over the interior nodes, plus the
// full-stencil operator rows used for residual evaluation.
struct LinearSystem {
  Eigen::SparseMatrix<double> A;       // interior x interior, SPD
  Eigen::SparseMatrix<double> A_glob;  // interior x (nx*ny), row sums vanish
  Eigen::VectorXd load;                // source functional over interior tests
  Eigen::VectorXd b;                   // load with Dirichlet data lifted
  int nxi = 0, nyi = 0;
  int cutoff_cells = 0;  // cells whose frozen state touched the cut-off band

  // Residual of the assembled equations at a full field (boundary included).
  Eigen::VectorXd residual(const Eigen::ArrayXXd& psi_full) const;
};

struct DirichletData {
  Eigen::VectorXd left, right;  // face values by t2 index
  double bottom = 0.0;
  double top = 0.0;
  void apply(Eigen::ArrayXXd& psi) const;
};

// psi = m * t2, the wall formula extended into the interior.
StreamField initial_guess(const FlattenedDomain& domain, double m);

// Dirichlet data on all four sides of the truncated domain. farfield mode
// places the asymptotic stream profiles on the faces; wallformula extends
// the wall formula m * t2 there instead. Wall values win at the corners.
DirichletData boundary_data(const FlattenedDomain& domain,
                            const FarFieldStates* farfield, double m,
                            FaceBcMode mode);

// Conservative bilinear-form assembly of the cut-off-regularized stream
// equation with coefficients frozen at psi_k.
LinearSystem assemble(const Eigen::ArrayXXd& psi_k, const FlattenedDomain& domain,
                      const ExtendedProfiles& ext, const CutOff& cutoff,
                      const GasModel& gas, const DirichletData& bc);

// Physical-coordinate gradient of a node field: centered differences inside,
// one-sided second order at boundary nodes, mapped through the flattening.
struct GradientField {
  Eigen::ArrayXXd gx1, gx2;
};
GradientField gradient_field(const FlattenedDomain& domain,
                             const Eigen::ArrayXXd& psi);

// Default cut-off margin: a thousandth of the smallest sonic-threshold scale
// (gamma-1) S rho0^(gamma+1) over the upstream section.
double auto_epsilon(const UpstreamState& upstream, const Profiles& profiles,
                    const GasModel& gas);

// Composition machinery shared by the solver and diagnostics.
struct SolveSetup {
  ExtendedProfiles ext;
  CutOff cutoff;
  double epsilon;
};
SolveSetup make_setup(const FarFieldStates& farfield, const Profiles& profiles,
                      const GasModel& gas, const SolverConfig& config);

// Outer fixed-point iteration with frozen coefficients. Throws picard_error
// when the iteration cap is exceeded; a converged field with the cut-off
// still active is returned with cutoff_active = true.
StreamField solve(const FlattenedDomain& domain, const Profiles& profiles,
                  const FarFieldStates& farfield, const GasModel& gas, double m,
                  const SolverConfig& config,
                  const std::optional<Eigen::ArrayXXd>& initial = std::nullopt);

}  // namespace nozzleflow
