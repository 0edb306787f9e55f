#include "nozzleflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace nozzleflow {

namespace {

// Physical-coordinate derivatives of a node field at one interior node.
struct NodeDeriv {
  double dx1, dx2;
};

NodeDeriv interior_deriv(const FlattenedDomain& dom, const Eigen::ArrayXXd& f,
                         int i, int j) {
  const double dt1 = (f(j, i + 1) - f(j, i - 1)) / (2.0 * dom.h1);
  const double dt2 = (f(j + 1, i) - f(j - 1, i)) / (2.0 * dom.h2);
  return {dt1 + dt2 * dom.dt2dx1_node(i, dom.t2(j)),
          dt2 / dom.H_node(i)};
}

}  // namespace

FlowField reconstruct_flow(const StreamField& stream, const Profiles& profiles,
                           const UpstreamState& upstream, const GasModel& gas) {
  if (!stream.converged)
    throw std::invalid_argument("reconstruct_flow: stream field not converged");
  if (stream.cutoff_active)
    throw std::invalid_argument(
        "reconstruct_flow: cut-off active, the field is not a physical flow");

  const FlattenedDomain& dom = stream.grid;
  ExtendedProfiles ext(compose_with_kappa(upstream, profiles, gas));
  const GradientField grad = gradient_field(dom, stream.values);

  FlowField flow;
  flow.rho.resize(dom.ny, dom.nx);
  flow.u.resize(dom.ny, dom.nx);
  flow.v.resize(dom.ny, dom.nx);
  flow.p.resize(dom.ny, dom.nx);
  flow.mach.resize(dom.ny, dom.nx);
  flow.c2.resize(dom.ny, dom.nx);
  flow.grad_sq.resize(dom.ny, dom.nx);
  flow.S_of_psi.resize(dom.ny, dom.nx);
  flow.B_of_psi.resize(dom.ny, dom.nx);

  std::vector<std::pair<int, int>> bad;
  for (int i = 0; i < dom.nx; ++i) {
    for (int j = 0; j < dom.ny; ++j) {
      const double psi = stream.values(j, i);
      const double S = ext.S(psi);
      const double B = ext.B(psi);
      const double q = grad.gx1(j, i) * grad.gx1(j, i) + grad.gx2(j, i) * grad.gx2(j, i);
      flow.grad_sq(j, i) = q;
      flow.S_of_psi(j, i) = S;
      flow.B_of_psi(j, i) = B;
      double rho;
      try {
        rho = subsonic_density(gas, 0.5 * q, S, B);
      } catch (const std::domain_error&) {
        bad.emplace_back(i, j);
        continue;
      }
      flow.rho(j, i) = rho;
      flow.u(j, i) = grad.gx2(j, i) / rho;
      flow.v(j, i) = -grad.gx1(j, i) / rho;
      flow.p(j, i) = pressure_from_density(gas, rho, S);
      flow.c2(j, i) = sound_speed_sq(gas, rho, S);
      flow.mach(j, i) = std::sqrt(q / (rho * rho * flow.c2(j, i)));
    }
  }
  if (!bad.empty()) {
    std::string msg = "reconstruct_flow: supersonic kinetic term at nodes";
    for (size_t k = 0; k < std::min<size_t>(bad.size(), 8); ++k)
      msg += " (" + std::to_string(bad[k].first) + "," + std::to_string(bad[k].second) + ")";
    if (bad.size() > 8) msg += " ...";
    throw reconstruction_error(msg, std::move(bad));
  }
  return flow;
}

double subsonic_margin(const StreamField& stream, const FlowField& flow,
                       const GasModel& gas) {
  double worst = -std::numeric_limits<double>::infinity();
  const int ny = static_cast<int>(flow.rho.rows());
  const int nx = static_cast<int>(flow.rho.cols());
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double margin =
          flow.grad_sq(j, i) -
          gas.gm1() * flow.S_of_psi(j, i) * std::pow(flow.rho(j, i), gas.gp1());
      worst = std::max(worst, margin);
    }
  (void)stream;
  return worst;
}

BoundsCheck check_bounds_and_monotonicity(const StreamField& stream,
                                          double bound_tol) {
  const FlattenedDomain& dom = stream.grid;
  BoundsCheck out;
  out.min_value = std::numeric_limits<double>::infinity();
  out.max_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < dom.nx; ++i)
    for (int j = 0; j < dom.ny; ++j) {
      const double v = stream.values(j, i);
      if (v < out.min_value) {
        out.min_value = v;
        out.min_i = i;
        out.min_j = j;
      }
      if (v > out.max_value) {
        out.max_value = v;
        out.max_i = i;
        out.max_j = j;
      }
    }
  out.bounds_ok =
      out.min_value >= -bound_tol && out.max_value <= stream.m + bound_tol;

  out.worst_slope = std::numeric_limits<double>::infinity();
  for (int i = 1; i < dom.nx - 1; ++i)
    for (int j = 1; j < dom.ny - 1; ++j) {
      const double slope =
          (stream.values(j + 1, i) - stream.values(j - 1, i)) / (2.0 * dom.h2);
      if (slope < out.worst_slope) {
        out.worst_slope = slope;
        out.slope_i = i;
        out.slope_j = j;
      }
    }
  out.monotone_ok = out.worst_slope > 0.0;
  return out;
}

SectionFlux mass_flux_sections(const FlowField& flow, const FlattenedDomain& domain,
                               double m, int n_sections) {
  SectionFlux out;
  n_sections = std::max(2, n_sections);
  for (int k = 0; k < n_sections; ++k) {
    const int i = static_cast<int>(
        std::lround(static_cast<double>(k) * (domain.nx - 1) / (n_sections - 1)));
    // Trapezoid over the section; dx2 = H * dt2 at a fixed column.
    double acc = 0.0;
    for (int j = 0; j + 1 < domain.ny; ++j)
      acc += 0.5 *
             (flow.rho(j, i) * flow.u(j, i) + flow.rho(j + 1, i) * flow.u(j + 1, i)) *
             domain.h2 * domain.H_node(i);
    out.t1.push_back(domain.t1(i));
    out.flux.push_back(acc);
    out.rel_dev.push_back(std::abs(acc - m) / m);
    out.max_rel_dev = std::max(out.max_rel_dev, out.rel_dev.back());
  }
  return out;
}

StreamlineDrift streamline_invariants(const FlowField& flow, const GasModel& gas) {
  StreamlineDrift d;
  const int ny = static_cast<int>(flow.rho.rows());
  const int nx = static_cast<int>(flow.rho.cols());
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double rho = flow.rho(j, i), p = flow.p(j, i);
      const double S_here = gas.gamma * p / (gas.gm1() * std::pow(rho, gas.gamma));
      d.entropy = std::max(
          d.entropy, std::abs(S_here - flow.S_of_psi(j, i)) / flow.S_of_psi(j, i));
      const double B_here = 0.5 * (flow.u(j, i) * flow.u(j, i) + flow.v(j, i) * flow.v(j, i)) +
                            gas.gamma * p / (gas.gm1() * rho);
      d.bernoulli = std::max(
          d.bernoulli, std::abs(B_here - flow.B_of_psi(j, i)) / flow.B_of_psi(j, i));
    }
  return d;
}

EulerResiduals euler_residuals(const FlowField& flow, const FlattenedDomain& domain,
                               const GasModel& gas) {
  const int nx = domain.nx, ny = domain.ny;
  Eigen::ArrayXXd fu(ny, nx), fv(ny, nx), mx1(ny, nx), mxy(ny, nx), my2(ny, nx),
      eu(ny, nx), ev(ny, nx);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double rho = flow.rho(j, i), u = flow.u(j, i), v = flow.v(j, i),
                   p = flow.p(j, i);
      fu(j, i) = rho * u;
      fv(j, i) = rho * v;
      mx1(j, i) = rho * u * u + p;
      mxy(j, i) = rho * u * v;
      my2(j, i) = rho * v * v + p;
      const double h_tot =
          0.5 * (u * u + v * v) + gas.gamma * p / (gas.gm1() * rho);
      eu(j, i) = rho * u * h_tot;
      ev(j, i) = rho * v * h_tot;
    }

  auto norm_of = [&](const Eigen::ArrayXXd& Fx, const Eigen::ArrayXXd& Fy) {
    ResidualNorm n;
    double sum = 0.0;
    for (int i = 1; i < nx - 1; ++i)
      for (int j = 1; j < ny - 1; ++j) {
        const NodeDeriv dx = interior_deriv(domain, Fx, i, j);
        const NodeDeriv dy = interior_deriv(domain, Fy, i, j);
        const double r = dx.dx1 + dy.dx2;
        n.max = std::max(n.max, std::abs(r));
        sum += r * r;
      }
    n.l2 = std::sqrt(sum * domain.h1 * domain.h2);
    return n;
  };

  EulerResiduals out;
  out.mass = norm_of(fu, fv);
  out.mom1 = norm_of(mx1, mxy);
  out.mom2 = norm_of(mxy, my2);
  out.energy = norm_of(eu, ev);
  return out;
}

Eigen::VectorXd discrete_farfield_profile(int ny, double gap_height, double m,
                                          const ExtendedProfiles& ext,
                                          const CutOff& cutoff, const GasModel& gas) {
  const double h2 = 1.0 / (ny - 1);
  Eigen::VectorXd psi(ny);
  for (int j = 0; j < ny; ++j) psi(j) = m * j * h2;

  Eigen::VectorXd K(ny - 1), F(ny - 1);
  Eigen::VectorXd lower(ny), diag(ny), upper(ny), rhs(ny), sol(ny);
  for (int it = 0; it < 200; ++it) {
    for (int c = 0; c + 1 < ny; ++c) {
      const double dpsi = (psi(c + 1) - psi(c)) / (h2 * gap_height);
      const double psic = 0.5 * (psi(c) + psi(c + 1));
      const auto td = truncated_density_full(dpsi * dpsi, psic, ext, cutoff, gas);
      K(c) = 1.0 / (gap_height * td.rho);
      F(c) = ext.dB(psic) * td.rho -
             ext.dS(psic) * std::pow(td.rho, gas.gamma) / gas.gamma;
    }
    // Tridiagonal Picard sweep matching the interior stencil of the
    // two-dimensional scheme on flat walls.
    diag(0) = 1.0;
    upper(0) = 0.0;
    rhs(0) = 0.0;
    for (int j = 1; j < ny - 1; ++j) {
      lower(j) = -K(j - 1) / h2;
      diag(j) = (K(j - 1) + K(j)) / h2;
      upper(j) = -K(j) / h2;
      rhs(j) = -gap_height * (h2 / 2.0) * (F(j - 1) + F(j));
    }
    lower(ny - 1) = 0.0;
    diag(ny - 1) = 1.0;
    rhs(ny - 1) = m;

    // Thomas algorithm.
    Eigen::VectorXd cp(ny), dp(ny);
    cp(0) = upper(0) / diag(0);
    dp(0) = rhs(0) / diag(0);
    for (int j = 1; j < ny; ++j) {
      const double w = diag(j) - lower(j) * cp(j - 1);
      cp(j) = (j < ny - 1 ? upper(j) : 0.0) / w;
      dp(j) = (rhs(j) - lower(j) * dp(j - 1)) / w;
    }
    sol(ny - 1) = dp(ny - 1);
    for (int j = ny - 2; j >= 0; --j) sol(j) = dp(j) - cp(j) * sol(j + 1);

    const double update = (sol - psi).cwiseAbs().maxCoeff();
    psi = 0.3 * psi + 0.7 * sol;
    if (update < 1e-13 * std::max(m, 1.0)) break;
  }
  return psi;
}

FarFieldGap farfield_gap(const StreamField& stream, const Profiles& profiles,
                         const FarFieldStates& farfield, const GasModel& gas,
                         int band_columns) {
  const FlattenedDomain& dom = stream.grid;
  FarFieldGap out;
  out.band_columns = band_columns;
  out.column_gap.resize(dom.nx);
  for (int i = 0; i < dom.nx; ++i) {
    double worst = 0.0;
    for (int j = 0; j < dom.ny; ++j) {
      const double x2 = dom.x2_node(i, j);
      const double ref = dom.t1(i) < 0.0 ? farfield.upstream.psi_bar(x2)
                                         : farfield.downstream.psi_bar(x2);
      worst = std::max(worst, std::abs(stream.values(j, i) - ref));
    }
    out.column_gap(i) = worst;
  }
  for (int k = 0; k < std::min(band_columns, dom.nx); ++k) {
    out.face_gap_up = std::max(out.face_gap_up, out.column_gap(k));
    out.face_gap_down = std::max(out.face_gap_down, out.column_gap(dom.nx - 1 - k));
  }

  // Discrete transverse profiles at the two face heights.
  ExtendedProfiles ext(compose_with_kappa(farfield.upstream, profiles, gas));
  CutOff cutoff(stream.epsilon > 0.0 ? stream.epsilon : 1e-3);
  const Eigen::VectorXd up_ref = discrete_farfield_profile(
      dom.ny, dom.H_node(0), stream.m, ext, cutoff, gas);
  const Eigen::VectorXd down_ref = discrete_farfield_profile(
      dom.ny, dom.H_node(dom.nx - 1), stream.m, ext, cutoff, gas);
  for (int k = 0; k < std::min(band_columns, dom.nx); ++k) {
    for (int j = 0; j < dom.ny; ++j) {
      out.face_gap_up_discrete = std::max(
          out.face_gap_up_discrete, std::abs(stream.values(j, k) - up_ref(j)));
      out.face_gap_down_discrete =
          std::max(out.face_gap_down_discrete,
                   std::abs(stream.values(j, dom.nx - 1 - k) - down_ref(j)));
    }
  }
  return out;
}

DiagnosticsReport run_diagnostics(const StreamField& stream, const Profiles& profiles,
                                  const FarFieldStates& farfield, const GasModel& gas,
                                  int n_sections) {
  DiagnosticsReport rep;
  const FlowField flow = reconstruct_flow(stream, profiles, farfield.upstream, gas);
  rep.M_margin = subsonic_margin(stream, flow, gas);
  rep.bounds = check_bounds_and_monotonicity(stream, 1e-9 * stream.m);
  rep.bounds_ok = rep.bounds.bounds_ok;
  rep.monotone_ok = rep.bounds.monotone_ok;
  rep.sections = mass_flux_sections(flow, stream.grid, stream.m, n_sections);
  rep.mass_flux_max_dev = rep.sections.max_rel_dev;
  const StreamlineDrift drift = streamline_invariants(flow, gas);
  rep.entropy_drift = drift.entropy;
  rep.bernoulli_drift = drift.bernoulli;
  rep.euler = euler_residuals(flow, stream.grid, gas);
  rep.gaps = farfield_gap(stream, profiles, farfield, gas);
  rep.farfield_gap = std::max(rep.gaps.face_gap_up, rep.gaps.face_gap_down);
  rep.farfield_gap_discrete =
      std::max(rep.gaps.face_gap_up_discrete, rep.gaps.face_gap_down_discrete);
  rep.max_mach = flow.mach.maxCoeff();
  return rep;
}

}  // namespace nozzleflow
