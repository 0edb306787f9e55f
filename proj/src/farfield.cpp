#include "nozzleflow/farfield.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "nozzleflow/roots.hpp"

namespace nozzleflow {

namespace {

constexpr int kQuadPoints = 2001;   // composite Simpson resolution
constexpr int kTableIntervals = 2000;

// 5-point Gauss-Legendre on [a, b].
double gauss5(const std::function<double(double)>& f, double a, double b) {
  static const double xg[5] = {0.0, 0.5384693101056831, -0.5384693101056831,
                               0.9061798459386640, -0.9061798459386640};
  static const double wg[5] = {0.5688888888888889, 0.4786286704993665,
                               0.4786286704993665, 0.2369268850561891,
                               0.2369268850561891};
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int k = 0; k < 5; ++k) s += wg[k] * f(mid + half * xg[k]);
  return s * half;
}

double simpson01(const std::function<double(double)>& f, int n_points) {
  const int n = n_points - 1;  // even number of intervals
  const double h = 1.0 / n;
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

double speed_sq_at(const Profiles& pr, const GasModel& gas, double p, double x2) {
  const double S = pr.S.value(x2);
  const double rho = density_from_pressure(gas, p, S);
  const double rad = 2.0 * (pr.B.value(x2) - S * std::pow(rho, gas.gm1()));
  return std::max(rad, 0.0);
}

struct PressureBracket {
  double lo, hi;        // (critical pressure of sup D, max pressure of inf D)
  double lo_in, hi_in;  // shrunk inward to avoid endpoint degeneracies
};

PressureBracket pressure_bracket(const Profiles& pr, const GasModel& gas) {
  const RatioRange r = ratio_range(pr, gas);
  PressureBracket b;
  b.lo = critical_pressure(gas, r.D_max);
  b.hi = max_pressure(gas, r.D_min);
  const double span = b.hi - b.lo;
  if (!(span > 0.0))
    throw farfield_error("far field: admissible pressure bracket is empty");
  b.lo_in = b.lo + 1e-12 * span;
  b.hi_in = b.hi - 1e-12 * span;
  return b;
}

}  // namespace

double mass_flux_of_pressure(const Profiles& profiles, const GasModel& gas, double p) {
  const PressureBracket br = pressure_bracket(profiles, gas);
  if (p < br.lo - 1e-12 * (br.hi - br.lo) || p > br.hi + 1e-12 * (br.hi - br.lo))
    throw std::domain_error("mass_flux_of_pressure: pressure outside admissible bracket");
  auto integrand = [&](double x2) {
    const double S = profiles.S.value(x2);
    const double rho = density_from_pressure(gas, p, S);
    return rho * std::sqrt(speed_sq_at(profiles, gas, p, x2));
  };
  return simpson01(integrand, kQuadPoints);
}

double UpstreamState::rho0(double x2) const {
  return density_from_pressure(gas_, p0_, profiles_.S.value(x2));
}

double UpstreamState::u0(double x2) const {
  return std::sqrt(speed_sq_at(profiles_, gas_, p0_, x2));
}

double UpstreamState::flux_density(double x2) const { return rho0(x2) * u0(x2); }

double UpstreamState::psi_bar(double x2) const {
  if (x2 <= 0.0) return 0.0;
  if (x2 >= 1.0) return psi_(psi_.size() - 1);
  const double h = 1.0 / kTableIntervals;
  const int i = std::min(static_cast<int>(x2 / h), kTableIntervals - 1);
  auto f = [this](double t) { return flux_density(t); };
  return psi_(i) + gauss5(f, i * h, x2);
}

double UpstreamState::kappa(double psi) const {
  if (psi <= 0.0) return 0.0;
  if (psi >= m_) return 1.0;
  return std::clamp(kappa_.value(psi), 0.0, 1.0);
}

UpstreamState solve_upstream(const Profiles& profiles, const GasModel& gas, double m) {
  if (!(m > 0.0)) throw std::domain_error("solve_upstream: mass flux must be positive");
  const PressureBracket br = pressure_bracket(profiles, gas);
  const double m_hi = mass_flux_of_pressure(profiles, gas, br.lo_in);
  const double m_lo = mass_flux_of_pressure(profiles, gas, br.hi_in);
  if (m > m_hi) throw farfield_error("solve_upstream: mass flux above sonic bound");
  if (m < m_lo)
    throw farfield_error("solve_upstream: mass flux below stagnation resolution");

  auto f = [&](double p) { return mass_flux_of_pressure(profiles, gas, p) - m; };
  const double p0 = find_root_bracketed(f, br.lo_in, br.hi_in,
                                        1e-15 * (br.hi - br.lo), 1e-12 * m);

  UpstreamState up;
  up.p0_ = p0;
  up.m_ = m;
  up.profiles_ = profiles;
  up.gas_ = gas;
  up.x2_ = Eigen::VectorXd::LinSpaced(kTableIntervals + 1, 0.0, 1.0);
  up.psi_.resize(kTableIntervals + 1);
  up.psi_(0) = 0.0;
  auto fd = [&](double t) { return up.flux_density(t); };
  for (int i = 0; i < kTableIntervals; ++i)
    up.psi_(i + 1) = up.psi_(i) + gauss5(fd, up.x2_(i), up.x2_(i + 1));
  Eigen::VectorXd inv_slope(kTableIntervals + 1);
  for (int i = 0; i <= kTableIntervals; ++i)
    inv_slope(i) = 1.0 / up.flux_density(up.x2_(i));
  up.kappa_ = HermiteInterpolant(up.psi_, up.x2_, inv_slope);
  return up;
}

namespace {

// Exit-side speed along the streamline from inlet height s, at pressure p1.
double u1_of_s(const UpstreamState& up, double p1, double s) {
  const GasModel& gas = up.gas();
  const double S = up.profiles().S.value(s);
  const double r0 = up.rho0(s);
  const double r1 = density_from_pressure(gas, p1, S);
  const double u0 = up.u0(s);
  const double rad =
      2.0 * S * (std::pow(r0, gas.gm1()) - std::pow(r1, gas.gm1())) + u0 * u0;
  return std::sqrt(std::max(rad, 0.0));
}

double width_integral(const UpstreamState& up, double p1) {
  const GasModel& gas = up.gas();
  auto integrand = [&](double s) {
    const double r1 = density_from_pressure(gas, p1, up.profiles().S.value(s));
    const double u1 = u1_of_s(up, p1, s);
    return up.flux_density(s) / (r1 * u1);
  };
  return simpson01(integrand, kQuadPoints);
}

// One adaptive RK4 step of y' = g(s) from s with target h; recursive step
// doubling keeps the local error below tol.
double rk4_adaptive(const std::function<double(double)>& g, double s, double h,
                    double tol, int depth) {
  auto rk4 = [&](double s0, double hh) {
    const double k1 = g(s0);
    const double k23 = g(s0 + 0.5 * hh);
    const double k4 = g(s0 + hh);
    return hh / 6.0 * (k1 + 4.0 * k23 + k4);
  };
  const double full = rk4(s, h);
  const double halves = rk4(s, 0.5 * h) + rk4(s + 0.5 * h, 0.5 * h);
  if (std::abs(halves - full) <= 15.0 * tol || depth >= 12) return halves;
  return rk4_adaptive(g, s, 0.5 * h, 0.5 * tol, depth + 1) +
         rk4_adaptive(g, s + 0.5 * h, 0.5 * h, 0.5 * tol, depth + 1);
}

}  // namespace

DownstreamState solve_downstream(const UpstreamState& upstream,
                                 const Profiles& profiles, const GasModel& gas,
                                 double width, double a) {
  if (!(width > 0.0)) throw std::domain_error("solve_downstream: width must be positive");
  const PressureBracket br = pressure_bracket(profiles, gas);

  const double W_lo = width_integral(upstream, br.lo_in);
  const double W_hi = width_integral(upstream, br.hi_in);
  if (width < W_lo || width > W_hi)
    throw farfield_error("solve_downstream: width outside admissible range for this m");

  auto f = [&](double p) { return width_integral(upstream, p) - width; };
  const double p1 = find_root_bracketed(f, br.lo_in, br.hi_in,
                                        1e-15 * (br.hi - br.lo), 1e-12 * width);

  DownstreamState down;
  down.p1_ = p1;
  down.a_ = a;
  down.b_ = a + width;
  down.up_ = std::make_shared<UpstreamState>(upstream);

  auto slope = [&](double s) {
    const double r1 = density_from_pressure(gas, p1, profiles.S.value(s));
    return upstream.flux_density(s) / (r1 * u1_of_s(upstream, p1, s));
  };
  const int n = kTableIntervals;
  Eigen::VectorXd sgrid = Eigen::VectorXd::LinSpaced(n + 1, 0.0, 1.0);
  Eigen::VectorXd y(n + 1), d(n + 1);
  y(0) = a;
  d(0) = slope(0.0);
  const double tol_loc = 1e-13 * width / n;
  for (int i = 0; i < n; ++i) {
    y(i + 1) = y(i) + rk4_adaptive(slope, sgrid(i), 1.0 / n, tol_loc, 0);
    d(i + 1) = slope(sgrid(i + 1));
  }
  if (std::abs(y(n) - down.b_) > 1e-8 * width)
    throw farfield_error("solve_downstream: streamline map misses the upper exit wall");
  down.y_map_ = HermiteInterpolant(std::move(sgrid), std::move(y), std::move(d));
  return down;
}

double DownstreamState::y_of_s(double s) const { return y_map_.value(s); }

double DownstreamState::s_of_y(double y) const { return y_map_.inverse(y); }

double DownstreamState::u1_at_y(double y) const {
  return u1_of_s(*up_, p1_, s_of_y(y));
}

double DownstreamState::rho1_at_y(double y) const {
  return density_from_pressure(up_->gas(), p1_, up_->profiles().S.value(s_of_y(y)));
}

double DownstreamState::psi_bar(double y) const {
  if (y <= a_) return 0.0;
  if (y >= b_) return up_->m();
  return up_->psi_bar(s_of_y(y));
}

MassFluxRange mass_flux_range(const Profiles& profiles, const GasModel& gas,
                              double width) {
  MassFluxRange r;
  const PressureBracket br = pressure_bracket(profiles, gas);
  r.m_tilde_up = mass_flux_of_pressure(profiles, gas, br.lo);

  auto solvable = [&](double m) {
    try {
      UpstreamState up = solve_upstream(profiles, gas, m);
      solve_downstream(up, profiles, gas, width, 0.0);
      return true;
    } catch (const farfield_error&) {
      return false;
    }
  };

  double m_ok = 0.5 * r.m_tilde_up;
  int guard = 0;
  while (!solvable(m_ok) && guard++ < 60) m_ok *= 0.5;
  if (guard >= 60)
    throw farfield_error("mass_flux_range: no solvable mass flux found");

  double m_bad = 0.0;
  double m = m_ok;
  while (m_bad == 0.0) {
    const double m_next = std::min(1.25 * m, r.m_tilde_up * (1.0 + 1e-9));
    if (solvable(m_next)) {
      m_ok = m_next;
      if (m_next >= r.m_tilde_up) break;  // upstream bound reached
      m = m_next;
    } else {
      m_bad = m_next;
    }
  }
  if (m_bad == 0.0) {
    r.m_bar = m_ok;
    return r;
  }
  const double tol = 1e-6 * r.m_tilde_up;
  while (m_bad - m_ok > tol) {
    const double mid = 0.5 * (m_ok + m_bad);
    (solvable(mid) ? m_ok : m_bad) = mid;
  }
  r.m_bar = m_ok;
  return r;
}

ComposedProfile compose_with_kappa(UpstreamState upstream, Profiles profiles,
                                   GasModel gas) {
  auto up = std::make_shared<const UpstreamState>(std::move(upstream));
  auto pr = std::make_shared<const Profiles>(std::move(profiles));
  ComposedProfile c;
  c.m = up->m();
  c.gamma = gas.gamma;
  c.S = [up, pr](double psi) { return pr->S.value(up->kappa(psi)); };
  c.B = [up, pr](double psi) { return pr->B.value(up->kappa(psi)); };
  c.dS = [up, pr](double psi) {
    const double x = up->kappa(psi);
    return pr->S.deriv(x) / up->flux_density(x);
  };
  c.dB = [up, pr](double psi) {
    const double x = up->kappa(psi);
    return pr->B.deriv(x) / up->flux_density(x);
  };
  return c;
}

ComposedPoint kappa_compose(const UpstreamState& upstream, const Profiles& profiles,
                            const GasModel& gas, double psi) {
  if (psi >= 0.0 && psi <= upstream.m()) {
    const double x = upstream.kappa(psi);
    const double kp = 1.0 / upstream.flux_density(x);
    return {profiles.S.value(x), profiles.B.value(x), profiles.S.deriv(x) * kp,
            profiles.B.deriv(x) * kp};
  }
  ExtendedProfiles ext(compose_with_kappa(upstream, profiles, gas));
  return {ext.S(psi), ext.B(psi), ext.dS(psi), ext.dB(psi)};
}

}  // namespace nozzleflow
