#pragma once

#include <stdexcept>

namespace nozzleflow {

// Polytropic gas with adiabatic exponent gamma > 1. All quantities are
// nondimensional; no unit system is imposed.
struct GasModel {
  double gamma;

  explicit GasModel(double g) : gamma(g) {
    if (!(g > 1.0)) throw std::domain_error("GasModel: gamma must exceed 1");
  }
  double gm1() const { return gamma - 1.0; }
  double gp1() const { return gamma + 1.0; }
};

// Pointwise thermodynamic state. chi is the kinetic term |grad psi|^2 / 2.
struct ThermoPoint {
  double rho;
  double p;
  double c2;
  double chi;
};

// Maximum (stagnation) pressure for Bernoulli/entropy ratio s = B/S^{1/gamma}:
// the pressure at which the speed vanishes.
double max_pressure(const GasModel& gas, double s);

// Critical (sonic) pressure for ratio s: the pressure at which the speed
// equals the sound speed.
double critical_pressure(const GasModel& gas, double s);

// Square of the critical speed: the sound speed squared evaluated at the
// critical pressure of ratio s and entropy value S.
double critical_speed_sq(const GasModel& gas, double s, double S);

// Density of a gas at pressure p with entropy value S, inverting
// p = ((gamma-1)/gamma) * S * rho^gamma.
double density_from_pressure(const GasModel& gas, double p, double S);

// Pressure from density, the exact inverse of density_from_pressure.
double pressure_from_density(const GasModel& gas, double rho, double S);

// Sound speed squared c^2 = (gamma-1) * S * rho^(gamma-1).
double sound_speed_sq(const GasModel& gas, double rho, double S);

// Density at which the flow is exactly sonic for data (S, B):
// rho_*^(gamma-1) = 2B / ((gamma+1) S).
double sonic_density(const GasModel& gas, double S, double B);

// Density of the fluid at rest: rho_max^(gamma-1) = B/S.
double stagnation_density(const GasModel& gas, double S, double B);

// Kinetic term at the sonic state: chi_* = ((gamma-1)/(gamma+1)) B rho_*^2.
double sonic_chi(const GasModel& gas, double S, double B);

// Unique density on the subsonic branch rho in [rho_*, rho_max] solving
//   B rho^2 - S rho^(gamma+1) = chi.
// Strictly decreasing in chi. chi beyond sonic_chi (by more than a 1e-12
// slack) throws "supersonic kinetic term".
double subsonic_density(const GasModel& gas, double chi, double S, double B);

// Ratio increment d such that critical_pressure(s + d) == max_pressure(s);
// closed form d = ((gamma-1)/2) * s.
double ratio_margin(const GasModel& gas, double s);

// Full state (rho, p, c^2) on the subsonic branch at kinetic term chi.
ThermoPoint thermo_point(const GasModel& gas, double chi, double S, double B);

}  // namespace nozzleflow
