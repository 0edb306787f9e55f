#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nozzleflow/diagnostics.hpp"
#include "nozzleflow/solver.hpp"

namespace nozzleflow {

enum class Classification { subsonic, margin_violated, non_converged };

std::string to_string(Classification c);

// Everything a classification attempt needs: geometry, data, grid, solver
// controls. The far-field states depend on m and are solved per attempt.
struct SolveContext {
  NozzleWalls walls;
  FlattenedDomain domain;
  Profiles profiles;
  GasModel gas;
  SolverConfig config;
};

struct ClassifyResult {
  Classification cls = Classification::non_converged;
  double m = 0.0;
  double margin = std::numeric_limits<double>::quiet_NaN();  // sup margin when a field exists
  double epsilon = 0.0;
  std::string cause;  // failure detail for non_converged
  std::optional<StreamField> field;
};

// Attempt the solve at mass flux m with cut-off margin eps. Subsonic means:
// converged, cut-off inactive, and margin at most -4*eps. A converged field
// with the cut-off engaged or with margin above the gate is margin_violated;
// far-field or iteration failures are non_converged.
ClassifyResult classify(const SolveContext& ctx, double m, double eps,
                        const std::optional<Eigen::ArrayXXd>& warm = std::nullopt);

struct CriticalFluxResult {
  double m_lo = 0.0;  // highest certified subsonic mass flux
  double m_hi = 0.0;  // lowest non-subsonic classification
  Classification hi_class = Classification::non_converged;
  double margin_at_lo = 0.0;
  double epsilon_final = 0.0;
  std::vector<double> epsilon_sequence;
  // Every attempt of the sweep: (m, margin, classification, epsilon).
  struct Attempt {
    double m;
    double margin;
    Classification cls;
    double eps;
  };
  std::vector<Attempt> curve;
};

// Locate the critical mass flux: expand upward from m_seed by factor 1.25
// until the first non-subsonic classification, then bisect to width tol_m.
// Whenever the bracket would close on a margin violation the cut-off margin
// is halved (down to a floor) and the bracket re-examined, mirroring a
// vanishing regularization sequence.
CriticalFluxResult find_critical(const SolveContext& ctx, double m_seed,
                                 double tol_m);

}  // namespace nozzleflow
