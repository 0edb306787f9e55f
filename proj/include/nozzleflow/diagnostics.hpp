#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nozzleflow/solver.hpp"

namespace nozzleflow {

// Physical flow reconstructed from the stream function.
struct FlowField {
  Eigen::ArrayXXd rho, u, v, p, mach, c2;
  Eigen::ArrayXXd grad_sq;            // |grad psi|^2 at nodes
  Eigen::ArrayXXd S_of_psi, B_of_psi; // streamline data carried to each node
};

class reconstruction_error : public std::runtime_error {
 public:
  reconstruction_error(const std::string& msg, std::vector<std::pair<int, int>> nodes)
      : std::runtime_error(msg), nodes_(std::move(nodes)) {}
  const std::vector<std::pair<int, int>>& offending_nodes() const { return nodes_; }

 private:
  std::vector<std::pair<int, int>> nodes_;
};

FlowField reconstruct_flow(const StreamField& stream, const Profiles& profiles,
                           const UpstreamState& upstream, const GasModel& gas);

// Supremum of |grad psi|^2 - (gamma-1) S rho^(gamma+1); negative iff the flow
// is uniformly subsonic.
double subsonic_margin(const StreamField& stream, const FlowField& flow,
                       const GasModel& gas);

struct BoundsCheck {
  bool bounds_ok = false;
  bool monotone_ok = false;
  double min_value = 0.0, max_value = 0.0;
  int min_i = 0, min_j = 0, max_i = 0, max_j = 0;
  double worst_slope = 0.0;  // most negative discrete d(psi)/d(t2)
  int slope_i = 0, slope_j = 0;
};

// Maximum-principle confinement 0 <= psi <= m and transverse monotonicity,
// with the worst offenders located.
BoundsCheck check_bounds_and_monotonicity(const StreamField& stream,
                                          double bound_tol);

struct SectionFlux {
  std::vector<double> t1;
  std::vector<double> flux;
  std::vector<double> rel_dev;
  double max_rel_dev = 0.0;
};

SectionFlux mass_flux_sections(const FlowField& flow, const FlattenedDomain& domain,
                               double m, int n_sections);

struct StreamlineDrift {
  double entropy = 0.0;    // vanishes by construction of the reconstruction
  double bernoulli = 0.0;  // max relative drift over nodes
};

StreamlineDrift streamline_invariants(const FlowField& flow, const GasModel& gas);

struct ResidualNorm {
  double l2 = 0.0;
  double max = 0.0;
};

struct EulerResiduals {
  ResidualNorm mass, mom1, mom2, energy;
};

// Centered-difference residuals of the conservation laws over the interior
// (one-node halo excluded).
EulerResiduals euler_residuals(const FlowField& flow, const FlattenedDomain& domain,
                               const GasModel& gas);

struct FarFieldGap {
  Eigen::VectorXd column_gap;       // per column, against the asymptotic profiles
  double face_gap_up = 0.0;         // band max near t1 = -L
  double face_gap_down = 0.0;       // band max near t1 = +L
  // Same bands against the discrete one-dimensional far-field profile on the
  // matching transverse grid; isolates pure truncation effects.
  double face_gap_up_discrete = 0.0;
  double face_gap_down_discrete = 0.0;
  int band_columns = 0;
};

FarFieldGap farfield_gap(const StreamField& stream, const Profiles& profiles,
                         const FarFieldStates& farfield, const GasModel& gas,
                         int band_columns = 3);

// Discrete one-dimensional far-field profile: the transverse problem the
// two-dimensional scheme settles into where the walls are flat. gap_height is
// the local wall distance, psi ranges from 0 to m across it.
Eigen::VectorXd discrete_farfield_profile(int ny, double gap_height, double m,
                                          const ExtendedProfiles& ext,
                                          const CutOff& cutoff, const GasModel& gas);

struct DiagnosticsReport {
  double M_margin = 0.0;
  bool bounds_ok = false;
  bool monotone_ok = false;
  double mass_flux_max_dev = 0.0;
  double bernoulli_drift = 0.0;
  double entropy_drift = 0.0;
  EulerResiduals euler;
  double farfield_gap = 0.0;           // worse of the two face bands
  double farfield_gap_discrete = 0.0;  // same, against the discrete profile
  double max_mach = 0.0;
  SectionFlux sections;
  FarFieldGap gaps;
  BoundsCheck bounds;
};

DiagnosticsReport run_diagnostics(const StreamField& stream, const Profiles& profiles,
                                  const FarFieldStates& farfield, const GasModel& gas,
                                  int n_sections = 9);

}  // namespace nozzleflow
