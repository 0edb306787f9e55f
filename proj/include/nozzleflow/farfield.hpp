#pragma once

#include <memory>
#include <stdexcept>

#include <Eigen/Core>

#include "nozzleflow/gas.hpp"
#include "nozzleflow/interp.hpp"
#include "nozzleflow/profiles.hpp"

namespace nozzleflow {

class farfield_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Asymptotic state far upstream: pressure p0 and the density/speed/stream
// profiles over the unit inlet section, determined by (S, B, m).
class UpstreamState {
 public:
  UpstreamState() = default;

  double p0() const { return p0_; }
  double m() const { return m_; }
  const Profiles& profiles() const { return profiles_; }
  const GasModel& gas() const { return gas_; }

  double rho0(double x2) const;
  double u0(double x2) const;
  double flux_density(double x2) const;  // rho0 * u0
  // Cumulative mass flux from the lower wall; 0 at x2=0 and m at x2=1.
  double psi_bar(double x2) const;
  // Streamline parameter: the inverse of psi_bar.
  double kappa(double psi) const;

 private:
  friend UpstreamState solve_upstream(const Profiles&, const GasModel&, double);
  double p0_ = 0.0, m_ = 0.0;
  Profiles profiles_{Profile1D::constant(1.0), Profile1D::constant(1.0)};
  GasModel gas_{2.0};
  Eigen::VectorXd x2_, psi_;   // cumulative table on a fine grid
  HermiteInterpolant kappa_;   // inverse of psi_bar, exact slopes 1/(rho0 u0)
};

// Asymptotic state far downstream: pressure p1, the streamline landing map
// y(s) from inlet height s to exit height y, and the exit profiles.
class DownstreamState {
 public:
  DownstreamState() = default;

  double p1() const { return p1_; }
  double exit_lower() const { return a_; }
  double exit_upper() const { return b_; }

  double y_of_s(double s) const;
  double s_of_y(double y) const;
  double u1_at_y(double y) const;
  double rho1_at_y(double y) const;
  double psi_bar(double y) const;

 private:
  friend DownstreamState solve_downstream(const UpstreamState&, const Profiles&,
                                          const GasModel&, double, double);
  double p1_ = 0.0, a_ = 0.0, b_ = 1.0;
  std::shared_ptr<const UpstreamState> up_;
  HermiteInterpolant y_map_;  // y(s) with exact slopes
};

struct FarFieldStates {
  UpstreamState upstream;
  DownstreamState downstream;
};

struct MassFluxRange {
  double m_tilde_up = 0.0;  // sonic-limited upstream bound
  double m_bar = 0.0;       // largest m with both far-field states solvable
  double beta = 0.25;       // exponent of the advisory lower gate delta^beta
};

// Mass flux carried by the upstream state at pressure p: the integral of
// rho0 * u0 over the inlet section. Strictly decreasing in p.
double mass_flux_of_pressure(const Profiles& profiles, const GasModel& gas, double p);

// Root of mass_flux_of_pressure(p) = m inside the admissible pressure
// bracket (critical pressure of sup D, maximum pressure of inf D).
UpstreamState solve_upstream(const Profiles& profiles, const GasModel& gas, double m);

// Downstream pressure from the exit-width equation, then the streamline map
// by integrating dy/ds with the found p1.
DownstreamState solve_downstream(const UpstreamState& upstream,
                                 const Profiles& profiles, const GasModel& gas,
                                 double width, double a);

MassFluxRange mass_flux_range(const Profiles& profiles, const GasModel& gas,
                              double width);

// Entropy/Bernoulli data as functions of the stream value, via the streamline
// parameter of the upstream state. Copies the state into shared storage, so
// the result owns everything it needs.
ComposedProfile compose_with_kappa(UpstreamState upstream, Profiles profiles,
                                   GasModel gas);

struct ComposedPoint {
  double S, B, dS, dB;
};

// Point query of the composition; stream values outside [0, m] are evaluated
// through the tapered extension rather than rejected.
ComposedPoint kappa_compose(const UpstreamState& upstream, const Profiles& profiles,
                            const GasModel& gas, double psi);

}  // namespace nozzleflow
