#include "nozzleflow/gas.hpp"

#include <algorithm>
#include <cmath>

#include "nozzleflow/roots.hpp"

namespace nozzleflow {

namespace {

void require_ratio(double s) {
  if (s < 0.0) throw std::domain_error("gas: Bernoulli/entropy ratio must be nonnegative");
}

void require_entropy(double S) {
  if (!(S > 0.0)) throw std::domain_error("gas: entropy value must be positive");
}

void require_bernoulli(double B) {
  if (!(B > 0.0)) throw std::domain_error("gas: Bernoulli value must be positive");
}

}  // namespace

double max_pressure(const GasModel& gas, double s) {
  require_ratio(s);
  return gas.gm1() / gas.gamma * std::pow(s, gas.gamma / gas.gm1());
}

double critical_pressure(const GasModel& gas, double s) {
  require_ratio(s);
  return gas.gm1() / gas.gamma * std::pow(2.0 * s / gas.gp1(), gas.gamma / gas.gm1());
}

double critical_speed_sq(const GasModel& gas, double s, double S) {
  require_ratio(s);
  require_entropy(S);
  const double rho_c = density_from_pressure(gas, critical_pressure(gas, s), S);
  return sound_speed_sq(gas, rho_c, S);
}

double density_from_pressure(const GasModel& gas, double p, double S) {
  require_entropy(S);
  if (p < 0.0) throw std::domain_error("gas: pressure must be nonnegative");
  return std::pow(gas.gamma * p / (gas.gm1() * S), 1.0 / gas.gamma);
}

double pressure_from_density(const GasModel& gas, double rho, double S) {
  require_entropy(S);
  if (rho < 0.0) throw std::domain_error("gas: density must be nonnegative");
  return gas.gm1() / gas.gamma * S * std::pow(rho, gas.gamma);
}

double sound_speed_sq(const GasModel& gas, double rho, double S) {
  require_entropy(S);
  if (rho < 0.0) throw std::domain_error("gas: density must be nonnegative");
  return gas.gm1() * S * std::pow(rho, gas.gm1());
}

double sonic_density(const GasModel& gas, double S, double B) {
  require_entropy(S);
  require_bernoulli(B);
  return std::pow(2.0 * B / (gas.gp1() * S), 1.0 / gas.gm1());
}

double stagnation_density(const GasModel& gas, double S, double B) {
  require_entropy(S);
  require_bernoulli(B);
  return std::pow(B / S, 1.0 / gas.gm1());
}

double sonic_chi(const GasModel& gas, double S, double B) {
  require_entropy(S);
  if (B == 0.0) return 0.0;
  require_bernoulli(B);
  const double rs = sonic_density(gas, S, B);
  return gas.gm1() / gas.gp1() * B * rs * rs;
}

double subsonic_density(const GasModel& gas, double chi, double S, double B) {
  require_entropy(S);
  require_bernoulli(B);
  if (chi < 0.0) throw std::domain_error("gas: kinetic term must be nonnegative");

  const double rho_max = stagnation_density(gas, S, B);
  if (chi == 0.0) return rho_max;

  const double rho_s = sonic_density(gas, S, B);
  const double chi_s = sonic_chi(gas, S, B);
  if (chi > chi_s) {
    // Floating-point noise at the sonic boundary is accepted as sonic.
    if (chi - chi_s <= 1e-12) return rho_s;
    throw std::domain_error("gas: supersonic kinetic term");
  }
  if (chi == chi_s) return rho_s;

  // B rho^2 - S rho^(gamma+1) is strictly decreasing on [rho_s, rho_max].
  auto g = [&](double rho) {
    return chi - (B * rho * rho - S * std::pow(rho, gas.gp1()));
  };
  auto dg = [&](double rho) {
    return -(2.0 * B * rho - gas.gp1() * S * std::pow(rho, gas.gamma));
  };
  return find_root_newton(g, dg, 0.5 * (rho_s + rho_max), rho_s, rho_max,
                          1e-14 * rho_max);
}

double ratio_margin(const GasModel& gas, double s) {
  if (!(s > 0.0)) throw std::domain_error("gas: ratio infimum must be positive");
  return 0.5 * gas.gm1() * s;
}

ThermoPoint thermo_point(const GasModel& gas, double chi, double S, double B) {
  ThermoPoint tp;
  tp.chi = chi;
  tp.rho = subsonic_density(gas, chi, S, B);
  tp.p = pressure_from_density(gas, tp.rho, S);
  tp.c2 = sound_speed_sq(gas, tp.rho, S);
  return tp;
}

}  // namespace nozzleflow
