#pragma once

#include <functional>
#include <utility>

#include <Eigen/Core>

#include "nozzleflow/gas.hpp"

namespace nozzleflow {

// Scalar profile on [0,1] with a first derivative. Closed-form families carry
// analytic derivatives; tabulated data uses monotone C1 interpolation.
class Profile1D {
 public:
  static Profile1D constant(double v);
  // sum_k coeffs[k] * x^k
  static Profile1D polynomial(Eigen::VectorXd coeffs);
  // base + amp * sin(k * pi * x)
  static Profile1D sine(double base, double amp, double k);
  static Profile1D tabulated(Eigen::VectorXd x, Eigen::VectorXd y);

  double value(double x) const { return val_(x); }
  double deriv(double x) const { return der_(x); }

 private:
  Profile1D(std::function<double(double)> v, std::function<double(double)> d)
      : val_(std::move(v)), der_(std::move(d)) {}
  std::function<double(double)> val_, der_;
};

// Upstream entropy S(x2) and Bernoulli B(x2) data on [0,1].
struct Profiles {
  Profile1D S;
  Profile1D B;
};

// C^{1,1} oscillation size: max of sup|S-inf S|, sup|B-inf B|, sup|S'|,
// sup|B'|, and the discrete Lipschitz constants of S' and B' (centered
// second differences), sampled on a uniform grid.
double oscillation_delta(const Profiles& profiles, int n_samples = 1001);

struct AdmissibilityReport {
  bool S_positive = false;
  bool B_positive = false;
  double S_min = 0.0, B_min = 0.0;
  // Endpoint derivatives of S*B^-gamma and of S^-gamma*B. The default gate
  // requires (S B^-gamma)'(0) >= 0 and (S B^-gamma)'(1) <= 0; the reciprocal
  // quantity has opposite derivative signs and is reported alongside, never
  // silently substituted.
  double SBmg_d0 = 0.0, SBmg_d1 = 0.0;
  double SmgB_d0 = 0.0, SmgB_d1 = 0.0;
  bool endpoint_condition_ok = false;
  bool reciprocal_condition_ok = false;
  double delta = 0.0;
  bool admissible() const {
    return S_positive && B_positive && endpoint_condition_ok;
  }
};

AdmissibilityReport check_admissibility(const Profiles& profiles, const GasModel& gas);

// Bernoulli/entropy ratio D(x2) = B * S^{-1/gamma}.
double ratio_D(const Profiles& profiles, const GasModel& gas, double x2);

struct RatioRange {
  double D_min;
  double D_max;
};
RatioRange ratio_range(const Profiles& profiles, const GasModel& gas, int n_samples = 2001);

// Monotone C2 cut-off: identity below -2*eps, constant -1.5*eps above -eps,
// quintic blend in between with slope in [0,1] everywhere.
class CutOff {
 public:
  explicit CutOff(double epsilon);
  double epsilon() const { return eps_; }
  double value(double s) const;
  double slope(double s) const;

 private:
  double eps_;
};

// Entropy/Bernoulli data composed with the upstream streamline parameter,
// as functions of the stream value on [0, m].
struct ComposedProfile {
  std::function<double(double)> S, dS, B, dB;
  double m = 0.0;
  double gamma = 0.0;
};

// C^{1,1} extension of composed profiles from [0, m] to the whole line.
// The entropy extension integrates a linear taper of its end slopes over
// [-m, 0] and [m, 2m]; the Bernoulli extension keeps B/S^gamma linear-tapered
// so that both derivatives vanish identically outside [-m, 2m].
class ExtendedProfiles {
 public:
  explicit ExtendedProfiles(ComposedProfile base);

  double S(double s) const;
  double dS(double s) const;   // == taper a(s)
  double B(double s) const;
  double dB(double s) const;
  double ratio(double s) const;       // B/S^gamma
  double dratio(double s) const;      // == taper b(s)
  double m() const { return base_.m; }
  double gamma() const { return base_.gamma; }

 private:
  ComposedProfile base_;
  double S0_, Sm_, dS0_, dSm_;   // entropy endpoint values / slopes
  double R0_, Rm_, dR0_, dRm_;   // ratio endpoint values / slopes
};

ExtendedProfiles extend_profiles(ComposedProfile base);

// Density of the cut-off-regularized flow. Solves the coupled relation in
// which the kinetic term entering the Bernoulli balance is capped below the
// sonic threshold. Wherever grad_psi_sq - (gamma-1)*S*rho^(gamma+1) stays
// below -2*eps this coincides with subsonic_density(grad_psi_sq/2, S, B).
struct TruncatedDensity {
  double rho;
  double margin;        // grad_psi_sq - (gamma-1)*S*rho^(gamma+1)
  bool cutoff_active;   // margin >= -2*eps
  int iterations;
};

TruncatedDensity truncated_density_full(double grad_psi_sq, double psi,
                                        const ExtendedProfiles& ext,
                                        const CutOff& cutoff,
                                        const GasModel& gas);

double truncated_density(double grad_psi_sq, double psi,
                         const ExtendedProfiles& ext, const CutOff& cutoff,
                         const GasModel& gas);

}  // namespace nozzleflow
