#include "nozzleflow/profiles.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "nozzleflow/interp.hpp"
#include "nozzleflow/roots.hpp"

namespace nozzleflow {

Profile1D Profile1D::constant(double v) {
  if (!(v > 0.0)) throw std::domain_error("Profile1D: values must be positive");
  return Profile1D([v](double) { return v; }, [](double) { return 0.0; });
}

Profile1D Profile1D::polynomial(Eigen::VectorXd coeffs) {
  if (coeffs.size() == 0) throw std::invalid_argument("Profile1D: empty coefficients");
  auto c = std::make_shared<Eigen::VectorXd>(std::move(coeffs));
  auto val = [c](double x) {
    double r = 0.0;
    for (int k = static_cast<int>(c->size()) - 1; k >= 0; --k) r = r * x + (*c)(k);
    return r;
  };
  auto der = [c](double x) {
    double r = 0.0;
    for (int k = static_cast<int>(c->size()) - 1; k >= 1; --k)
      r = r * x + k * (*c)(k);
    return r;
  };
  return Profile1D(val, der);
}

Profile1D Profile1D::sine(double base, double amp, double k) {
  const double w = k * M_PI;
  return Profile1D([=](double x) { return base + amp * std::sin(w * x); },
                   [=](double x) { return amp * w * std::cos(w * x); });
}

Profile1D Profile1D::tabulated(Eigen::VectorXd x, Eigen::VectorXd y) {
  auto p = std::make_shared<PchipInterpolant>(std::move(x), std::move(y));
  return Profile1D([p](double q) { return p->value(q); },
                   [p](double q) { return p->deriv(q); });
}

double oscillation_delta(const Profiles& profiles, int n_samples) {
  if (n_samples < 3) throw std::invalid_argument("oscillation_delta: need >= 3 samples");
  const int n = n_samples;
  const double h = 1.0 / (n - 1);
  Eigen::VectorXd S(n), B(n);
  double max_dS = 0.0, max_dB = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = i * h;
    S(i) = profiles.S.value(x);
    B(i) = profiles.B.value(x);
    max_dS = std::max(max_dS, std::abs(profiles.S.deriv(x)));
    max_dB = std::max(max_dB, std::abs(profiles.B.deriv(x)));
  }
  const double S_inf = S.minCoeff(), B_inf = B.minCoeff();
  double delta = std::max({(S.array() - S_inf).abs().maxCoeff(),
                           (B.array() - B_inf).abs().maxCoeff(), max_dS, max_dB});
  // Lipschitz constants of the first derivatives via centered second differences.
  for (int i = 1; i < n - 1; ++i) {
    delta = std::max(delta, std::abs(S(i + 1) - 2.0 * S(i) + S(i - 1)) / (h * h));
    delta = std::max(delta, std::abs(B(i + 1) - 2.0 * B(i) + B(i - 1)) / (h * h));
  }
  return delta;
}

AdmissibilityReport check_admissibility(const Profiles& profiles, const GasModel& gas) {
  AdmissibilityReport rep;
  const int n = 2001;
  double S_min = std::numeric_limits<double>::infinity();
  double B_min = S_min;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / (n - 1);
    S_min = std::min(S_min, profiles.S.value(x));
    B_min = std::min(B_min, profiles.B.value(x));
  }
  rep.S_min = S_min;
  rep.B_min = B_min;
  rep.S_positive = S_min > 0.0;
  rep.B_positive = B_min > 0.0;

  const double g = gas.gamma;
  auto d_SBmg = [&](double x) {
    const double S = profiles.S.value(x), B = profiles.B.value(x);
    return profiles.S.deriv(x) * std::pow(B, -g) -
           g * S * std::pow(B, -g - 1.0) * profiles.B.deriv(x);
  };
  auto d_SmgB = [&](double x) {
    const double S = profiles.S.value(x), B = profiles.B.value(x);
    return -g * std::pow(S, -g - 1.0) * profiles.S.deriv(x) * B +
           std::pow(S, -g) * profiles.B.deriv(x);
  };
  rep.SBmg_d0 = d_SBmg(0.0);
  rep.SBmg_d1 = d_SBmg(1.0);
  rep.SmgB_d0 = d_SmgB(0.0);
  rep.SmgB_d1 = d_SmgB(1.0);
  rep.endpoint_condition_ok = rep.SBmg_d0 >= 0.0 && rep.SBmg_d1 <= 0.0;
  rep.reciprocal_condition_ok = rep.SmgB_d0 >= 0.0 && rep.SmgB_d1 <= 0.0;
  rep.delta = oscillation_delta(profiles);
  return rep;
}

double ratio_D(const Profiles& profiles, const GasModel& gas, double x2) {
  return profiles.B.value(x2) * std::pow(profiles.S.value(x2), -1.0 / gas.gamma);
}

RatioRange ratio_range(const Profiles& profiles, const GasModel& gas, int n_samples) {
  RatioRange r{std::numeric_limits<double>::infinity(), 0.0};
  for (int i = 0; i < n_samples; ++i) {
    const double x = static_cast<double>(i) / (n_samples - 1);
    const double D = ratio_D(profiles, gas, x);
    r.D_min = std::min(r.D_min, D);
    r.D_max = std::max(r.D_max, D);
  }
  return r;
}

CutOff::CutOff(double epsilon) : eps_(epsilon) {
  if (!(epsilon > 0.0)) throw std::domain_error("CutOff: epsilon must be positive");
}

// Quintic blend h(t) = t - t^3 + t^4/2 on [0,1]: h(0)=0, h(1)=1/2, h'(0)=1,
// h'(1)=0, h''(0)=h''(1)=0, and h' decreases monotonically from 1 to 0.
double CutOff::value(double s) const {
  if (s < -2.0 * eps_) return s;
  if (s >= -eps_) return -1.5 * eps_;
  const double t = (s + 2.0 * eps_) / eps_;
  const double h = t - t * t * t + 0.5 * t * t * t * t;
  return -2.0 * eps_ + eps_ * h;
}

double CutOff::slope(double s) const {
  if (s < -2.0 * eps_) return 1.0;
  if (s >= -eps_) return 0.0;
  const double t = (s + 2.0 * eps_) / eps_;
  return 1.0 - 3.0 * t * t + 2.0 * t * t * t;
}

ExtendedProfiles::ExtendedProfiles(ComposedProfile base) : base_(std::move(base)) {
  if (!(base_.m > 0.0)) throw std::domain_error("ExtendedProfiles: m must be positive");
  if (!(base_.gamma > 1.0)) throw std::domain_error("ExtendedProfiles: gamma must exceed 1");
  const double m = base_.m, g = base_.gamma;
  S0_ = base_.S(0.0);
  Sm_ = base_.S(m);
  dS0_ = base_.dS(0.0);
  dSm_ = base_.dS(m);
  auto ratio_at = [&](double s) { return base_.B(s) / std::pow(base_.S(s), g); };
  auto dratio_at = [&](double s) {
    const double S = base_.S(s);
    return (base_.dB(s) - g * base_.B(s) * base_.dS(s) / S) / std::pow(S, g);
  };
  R0_ = ratio_at(0.0);
  Rm_ = ratio_at(m);
  dR0_ = dratio_at(0.0);
  dRm_ = dratio_at(m);
  // The extension must stay positive; with C^{1,1} data of small oscillation
  // the tapered tails move the endpoint values by at most |slope|*m/2.
  const double S_tail_lo = S0_ - 0.5 * dS0_ * m;
  const double S_tail_hi = Sm_ + 0.5 * dSm_ * m;
  if (!(S_tail_lo > 0.0 && S_tail_hi > 0.0))
    throw std::domain_error("ExtendedProfiles: entropy extension loses positivity");
  const double R_tail_lo = R0_ - 0.5 * dR0_ * m;
  const double R_tail_hi = Rm_ + 0.5 * dRm_ * m;
  if (!(R_tail_lo > 0.0 && R_tail_hi > 0.0))
    throw std::domain_error("ExtendedProfiles: Bernoulli extension loses positivity");
}

namespace {

// Integral of a linear taper with endpoint slope `slope` over the tail.
// Above m: value(m) + slope * (tau - tau^2/(2m)) with tau = s - m in [0, m].
// Below 0: value(0) + slope * (s + s^2/(2m)) with s in [-m, 0].
double taper_value(double s, double m, double v0, double vm, double d0, double dm,
                   const std::function<double(double)>& inner) {
  if (s >= 0.0 && s <= m) return inner(s);
  if (s > m) {
    const double tau = std::min(s - m, m);
    return vm + dm * (tau - 0.5 * tau * tau / m);
  }
  const double u = std::max(s, -m);
  return v0 + d0 * (u + 0.5 * u * u / m);
}

double taper_slope(double s, double m, double d0, double dm,
                   const std::function<double(double)>& inner_d) {
  if (s >= 0.0 && s <= m) return inner_d(s);
  if (s > m) return (s >= 2.0 * m) ? 0.0 : dm * (2.0 * m - s) / m;
  return (s <= -m) ? 0.0 : d0 * (s + m) / m;
}

}  // namespace

double ExtendedProfiles::S(double s) const {
  return taper_value(s, base_.m, S0_, Sm_, dS0_, dSm_, base_.S);
}

double ExtendedProfiles::dS(double s) const {
  return taper_slope(s, base_.m, dS0_, dSm_, base_.dS);
}

double ExtendedProfiles::ratio(double s) const {
  const double g = base_.gamma;
  auto inner = [&](double q) { return base_.B(q) / std::pow(base_.S(q), g); };
  return taper_value(s, base_.m, R0_, Rm_, dR0_, dRm_, inner);
}

double ExtendedProfiles::dratio(double s) const {
  const double g = base_.gamma;
  auto inner_d = [&](double q) {
    const double Sq = base_.S(q);
    return (base_.dB(q) - g * base_.B(q) * base_.dS(q) / Sq) / std::pow(Sq, g);
  };
  return taper_slope(s, base_.m, dR0_, dRm_, inner_d);
}

double ExtendedProfiles::B(double s) const {
  if (s >= 0.0 && s <= base_.m) return base_.B(s);
  return std::pow(S(s), base_.gamma) * ratio(s);
}

double ExtendedProfiles::dB(double s) const {
  if (s >= 0.0 && s <= base_.m) return base_.dB(s);
  const double g = base_.gamma;
  const double Ss = S(s);
  return g * std::pow(Ss, g - 1.0) * dS(s) * ratio(s) + std::pow(Ss, g) * dratio(s);
}

ExtendedProfiles extend_profiles(ComposedProfile base) {
  return ExtendedProfiles(std::move(base));
}

TruncatedDensity truncated_density_full(double grad_psi_sq, double psi,
                                        const ExtendedProfiles& ext,
                                        const CutOff& cutoff, const GasModel& gas) {
  if (grad_psi_sq < 0.0)
    throw std::domain_error("truncated_density: squared gradient must be nonnegative");
  const double S = ext.S(psi);
  const double B = ext.B(psi);
  const double eps = cutoff.epsilon();
  const double gm1 = gas.gm1(), gp1 = gas.gp1();
  const double chi = 0.5 * grad_psi_sq;
  const double chi_s = sonic_chi(gas, S, B);
  const double rho_s = sonic_density(gas, S, B);

  auto margin_of = [&](double rho) {
    return grad_psi_sq - gm1 * S * std::pow(rho, gp1);
  };

  // Fast path: the plain subsonic density already sits below the cut-off band.
  if (chi < chi_s) {
    const double rho_plain = subsonic_density(gas, chi, S, B);
    const double mg = margin_of(rho_plain);
    if (mg < -2.0 * eps) return {rho_plain, mg, false, 0};
  }

  // Damped fixed point on rho: freeze the capped kinetic term, solve the
  // Bernoulli balance B r^2 - ((gamma+1)/2) S r^(gamma+1) = z/2, repeat.
  auto inner_solve = [&](double z) {
    auto g = [&](double r) {
      return B * r * r - 0.5 * gp1 * S * std::pow(r, gp1) - 0.5 * z;
    };
    auto dg = [&](double r) {
      return 2.0 * B * r - 0.5 * gp1 * gp1 * S * std::pow(r, gas.gamma);
    };
    double hi = rho_s;
    while (g(hi) > 0.0) hi *= 1.5;  // g(rho_s) = -z/2 > 0 when z < 0
    return find_root_newton(g, dg, std::min(1.05 * rho_s, hi), rho_s, hi,
                            1e-15 * rho_s);
  };

  double rho = (chi < chi_s) ? subsonic_density(gas, chi, S, B) : rho_s;
  const double tol = 1e-12;
  const int max_iter = 100;
  for (int it = 1; it <= max_iter; ++it) {
    const double z = cutoff.value(margin_of(rho));
    const double rho_new = inner_solve(z);
    const double step = rho_new - rho;
    rho += 0.5 * step;  // damping
    if (std::abs(step) <= tol * std::max(1.0, rho)) {
      const double mg = margin_of(rho);
      return {rho, mg, mg >= -2.0 * eps, it};
    }
  }

  // The damped map loses contraction exactly where the root sits on the
  // cut-off blend at near-sonic density. The coupled relation is still
  // strictly monotone in rho there, so fall back to bisection on it.
  auto G = [&](double r) {
    const double rg = std::pow(r, gp1);
    return 0.5 * (cutoff.value(grad_psi_sq - gm1 * S * rg) + gm1 * S * rg) +
           S * rg - B * r * r;
  };
  double lo = rho_s, hi = std::max(rho, rho_s);
  int guard = 0;
  while (G(hi) <= 0.0 && guard++ < 200) hi = std::max(1.5 * hi, rho_s + 1e-3);
  if (G(lo) > 0.0 || G(hi) <= 0.0)
    throw std::runtime_error(
        "truncated_density: fixed point failed to converge, last rho = " +
        std::to_string(rho));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (G(mid) <= 0.0 ? lo : hi) = mid;
  }
  rho = 0.5 * (lo + hi);
  const double mg = margin_of(rho);
  return {rho, mg, mg >= -2.0 * eps, max_iter};
}

double truncated_density(double grad_psi_sq, double psi,
                         const ExtendedProfiles& ext, const CutOff& cutoff,
                         const GasModel& gas) {
  return truncated_density_full(grad_psi_sq, psi, ext, cutoff, gas).rho;
}

}  // namespace nozzleflow
