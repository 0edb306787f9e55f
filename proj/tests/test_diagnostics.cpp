#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nozzleflow/diagnostics.hpp"

using namespace nozzleflow;

namespace {

Profiles constant_profiles(double S = 1.0, double B = 1.0) {
  return {Profile1D::constant(S), Profile1D::constant(B)};
}

struct Ctx {
  NozzleWalls walls;
  FlattenedDomain domain;
  Profiles profiles;
  GasModel gas;
  FarFieldStates ff;
};

Ctx make_ctx(const NozzleWalls& walls, const Profiles& pr, double gamma, double m,
             double L, int nx, int ny) {
  GasModel gas(gamma);
  auto up = solve_upstream(pr, gas, m);
  auto down = solve_downstream(up, pr, gas, walls.exit_width(), walls.exit_lower());
  return {walls, FlattenedDomain::truncate(walls, L, nx, ny), pr, gas,
          {std::move(up), std::move(down)}};
}

const double kUniformM = 0.9 * std::sqrt(0.2);  // rho0 = 0.9, u0 = sqrt(0.2)

Ctx uniform_ctx(int nx = 21, int ny = 11) {
  return make_ctx(NozzleWalls::straight(), constant_profiles(), 2.0, kUniformM,
                  10.0, nx, ny);
}

StreamField solved(const Ctx& ctx, double m) {
  SolverConfig cfg;
  return solve(ctx.domain, ctx.profiles, ctx.ff, ctx.gas, m, cfg);
}

}  // namespace

TEST_CASE("uniform channel reconstructs the far-field state everywhere") {
  auto ctx = uniform_ctx();
  auto field = solved(ctx, kUniformM);
  auto flow = reconstruct_flow(field, ctx.profiles, ctx.ff.upstream, ctx.gas);
  CHECK((flow.rho - 0.9).abs().maxCoeff() < 1e-9);
  CHECK((flow.u - std::sqrt(0.2)).abs().maxCoeff() < 1e-9);
  CHECK(flow.v.abs().maxCoeff() < 1e-9);
  CHECK((flow.p - 0.405).abs().maxCoeff() < 1e-9);
  // Sound speed identity c^2 = gamma p / rho.
  CHECK((flow.c2 - ctx.gas.gamma * flow.p / flow.rho).abs().maxCoeff() < 1e-12);
  CHECK(flow.mach.maxCoeff() < 1.0);
}

TEST_CASE("uniform channel margin matches the closed form") {
  auto ctx = uniform_ctx();
  auto field = solved(ctx, kUniformM);
  auto flow = reconstruct_flow(field, ctx.profiles, ctx.ff.upstream, ctx.gas);
  // q = m^2 = 0.162 and rho^3 = 0.729.
  CHECK(subsonic_margin(field, flow, ctx.gas) ==
        doctest::Approx(-0.567).epsilon(1e-8));
}

TEST_CASE("margin tends to the stagnation value as the flux vanishes") {
  auto ctx = make_ctx(NozzleWalls::straight(), constant_profiles(), 2.0, 1e-3, 10.0,
                      21, 11);
  auto field = solved(ctx, 1e-3);
  auto flow = reconstruct_flow(field, ctx.profiles, ctx.ff.upstream, ctx.gas);
  CHECK(subsonic_margin(field, flow, ctx.gas) == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("margin vanishes exactly at the sonic uniform state") {
  // Hand-built field: the sonic uniform flow m = (2/3)^{3/2} in a straight
  // channel gives |grad psi|^2 = (2/3)^3 = (gamma-1) S rho^3.
  const double m_sonic = std::pow(2.0 / 3.0, 1.5);
  auto ctx = make_ctx(NozzleWalls::straight(), constant_profiles(), 2.0,
                      m_sonic * (1.0 - 1e-9), 10.0, 21, 11);
  auto field = initial_guess(ctx.domain, m_sonic);
  field.converged = true;
  field.cutoff_active = false;
  auto flow = reconstruct_flow(field, ctx.profiles, ctx.ff.upstream, ctx.gas);
  CHECK(std::abs(subsonic_margin(field, flow, ctx.gas)) < 1e-12);
}

TEST_CASE("margin near the sonic state follows the uniform-state closed form") {
  const double m = std::pow(2.0 / 3.0, 1.5) * 0.985;
  auto ctx = make_ctx(NozzleWalls::straight(), constant_profiles(), 2.0, m, 10.0,
                      21, 11);
  auto field = solved(ctx, m);
  auto flow = reconstruct_flow(field, ctx.profiles, ctx.ff.upstream, ctx.gas);
  // Uniform state: M = m^2 - rho0^3 with rho0 from the flux relation.
  const double rho0 = ctx.ff.upstream.rho0(0.5);
  const double expect = m * m - rho0 * rho0 * rho0;
  CHECK(subsonic_margin(field, flow, ctx.gas) ==
        doctest::Approx(expect).epsilon(1e-6));
  CHECK(expect < 0.0);
  CHECK(expect > -0.12);
}

TEST_CASE("reconstruction refuses supersonic kinetic data") {
  auto ctx = uniform_ctx();
  auto field = initial_guess(ctx.domain, 1.2);  // gradient 1.2 exceeds sonic
  field.converged = true;
  field.cutoff_active = false;
  CHECK_THROWS_AS(reconstruct_flow(field, ctx.profiles, ctx.ff.upstream, ctx.gas),
                  reconstruction_error);
}

TEST_CASE("bounds and monotonicity checks locate offenders") {
  auto ctx = uniform_ctx();
  auto field = solved(ctx, kUniformM);
  auto ok = check_bounds_and_monotonicity(field, 1e-9 * field.m);
  CHECK(ok.bounds_ok);
  CHECK(ok.monotone_ok);

  auto bad = field;
  bad.values(4, 7) = -1e-3 * field.m;
  auto rep = check_bounds_and_monotonicity(bad, 1e-9 * field.m);
  CHECK_FALSE(rep.bounds_ok);
  CHECK(rep.min_i == 7);
  CHECK(rep.min_j == 4);

  auto reversed = field;
  for (int i = 0; i < ctx.domain.nx; ++i)
    for (int j = 0; j < ctx.domain.ny; ++j)
      reversed.values(j, i) = field.m * (1.0 - ctx.domain.t2(j));
  CHECK_FALSE(check_bounds_and_monotonicity(reversed, 1e-9 * field.m).monotone_ok);
}

TEST_CASE("section fluxes of the uniform channel carry no deviation") {
  auto ctx = uniform_ctx();
  auto field = solved(ctx, kUniformM);
  auto flow = reconstruct_flow(field, ctx.profiles, ctx.ff.upstream, ctx.gas);
  auto sec = mass_flux_sections(flow, ctx.domain, field.m, 7);
  CHECK(sec.max_rel_dev < 1e-10);
  CHECK(sec.flux.size() == 7);
}

TEST_CASE("streamline invariants vanish for the uniform channel") {
  auto ctx = uniform_ctx();
  auto field = solved(ctx, kUniformM);
  auto flow = reconstruct_flow(field, ctx.profiles, ctx.ff.upstream, ctx.gas);
  auto drift = streamline_invariants(flow, ctx.gas);
  // Entropy transport holds by construction of the reconstruction; the
  // Bernoulli drift is the root residual of the density solve. Both are
  // rounding-level here; the physics content lives in the Euler residuals.
  CHECK(drift.entropy < 1e-12);
  CHECK(drift.bernoulli < 1e-12);
}

TEST_CASE("Euler residuals vanish on the uniform state and respond linearly") {
  auto ctx = uniform_ctx(41, 21);
  auto field = solved(ctx, kUniformM);
  auto flow = reconstruct_flow(field, ctx.profiles, ctx.ff.upstream, ctx.gas);
  auto res = euler_residuals(flow, ctx.domain, ctx.gas);
  CHECK(res.mass.max < 1e-12);
  CHECK(res.mom1.max < 1e-12);
  CHECK(res.mom2.max < 1e-12);
  CHECK(res.energy.max < 1e-12);

  // A small stream-function bump perturbs the transverse momentum residual in
  // proportion to its amplitude. (For a uniform base flow the linear response
  // of the axial momentum cancels: u is constant and mixed partials commute.)
  auto perturbed = [&](double amp) {
    auto f = field;
    for (int i = 0; i < ctx.domain.nx; ++i)
      for (int j = 0; j < ctx.domain.ny; ++j) {
        const double t1 = ctx.domain.t1(i) / 10.0, t2 = ctx.domain.t2(j);
        f.values(j, i) += amp * std::exp(-4.0 * t1 * t1) * t2 * (1.0 - t2);
      }
    auto fl = reconstruct_flow(f, ctx.profiles, ctx.ff.upstream, ctx.gas);
    return euler_residuals(fl, ctx.domain, ctx.gas).mom2.max;
  };
  const double r1 = perturbed(1e-4);
  const double r2 = perturbed(1e-3);
  CHECK(r2 / r1 > 5.0);
  CHECK(r2 / r1 < 20.0);
}

TEST_CASE("Euler residuals contract under grid refinement") {
  Profiles pr{Profile1D::polynomial(Eigen::Vector3d(1.0, 0.01, -0.01)),
              Profile1D::constant(1.0)};
  auto run = [&](int nx, int ny) {
    auto ctx = make_ctx(NozzleWalls::straight(), pr, 2.0, 0.3, 10.0, nx, ny);
    auto field = solved(ctx, 0.3);
    auto flow = reconstruct_flow(field, ctx.profiles, ctx.ff.upstream, ctx.gas);
    return euler_residuals(flow, ctx.domain, ctx.gas);
  };
  auto coarse = run(51, 13);
  auto fine = run(101, 25);
  // The transverse momentum balance is the only law the x1-independent
  // channel flow exercises at leading order; the rest sit at rounding level.
  CHECK(coarse.mom2.l2 / fine.mom2.l2 > 2.5);
  CHECK(fine.mass.max < 1e-12);
}

TEST_CASE("far-field gap decays away from the throat") {
  auto ctx = make_ctx(NozzleWalls::tanh_family(0.0, 1.2, 2.0), constant_profiles(),
                      2.0, 0.3, 25.0, 101, 26);
  auto field = solved(ctx, 0.3);
  auto gaps = farfield_gap(field, ctx.profiles, ctx.ff, ctx.gas);
  // Face columns carry the asymptotic data exactly in farfield mode.
  CHECK(gaps.column_gap(0) < 1e-12);
  CHECK(gaps.column_gap(ctx.domain.nx - 1) < 1e-12);
  // Moving from the upstream face toward the throat the gap grows.
  const int throat = ctx.domain.nx / 2;
  for (int i = 1; i + 1 < throat - 5; ++i) {
    if (gaps.column_gap(i) > 1e-12)
      CHECK(gaps.column_gap(i) <= gaps.column_gap(i + 1) + 1e-13);
  }
  CHECK(gaps.face_gap_up < 1e-8 * field.m);
}

TEST_CASE("discrete transverse profile is linear for constant data") {
  GasModel gas(2.0);
  ComposedProfile c;
  c.m = 0.3;
  c.gamma = 2.0;
  c.S = [](double) { return 1.0; };
  c.dS = [](double) { return 0.0; };
  c.B = [](double) { return 1.0; };
  c.dB = [](double) { return 0.0; };
  ExtendedProfiles ext(std::move(c));
  CutOff cutoff(1e-3);
  auto prof = discrete_farfield_profile(26, 1.0, 0.3, ext, cutoff, gas);
  for (int j = 0; j < 26; ++j)
    CHECK(prof(j) == doctest::Approx(0.3 * j / 25.0).epsilon(1e-11));
}

TEST_CASE("full diagnostics of a tanh-nozzle run") {
  auto ctx = make_ctx(NozzleWalls::tanh_family(0.0, 1.2, 2.0), constant_profiles(),
                      2.0, 0.3, 25.0, 101, 26);
  auto field = solved(ctx, 0.3);
  auto rep = run_diagnostics(field, ctx.profiles, ctx.ff, ctx.gas);
  CHECK(rep.M_margin < 0.0);
  CHECK(rep.bounds_ok);
  CHECK(rep.monotone_ok);
  CHECK(rep.max_mach < 1.0);
  CHECK(rep.mass_flux_max_dev < 5e-3);
  CHECK(rep.bernoulli_drift < 1e-6);
  CHECK(rep.entropy_drift < 1e-10);
  CHECK(rep.euler.mass.l2 < 1e-2);
  CHECK(rep.farfield_gap < 1e-6);

  auto flow = reconstruct_flow(field, ctx.profiles, ctx.ff.upstream, ctx.gas);
  // Horizontal velocity positive everywhere; vertical velocity dies out on
  // the face bands where the walls are flat.
  CHECK(flow.u.minCoeff() > 0.0);
  double v_band = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < ctx.domain.ny; ++j) {
      v_band = std::max(v_band, std::abs(flow.v(j, k)));
      v_band = std::max(v_band, std::abs(flow.v(j, ctx.domain.nx - 1 - k)));
    }
  CHECK(v_band < 1e-4);
  // The mass-flux components recover the stream-function gradient.
  auto grad = gradient_field(ctx.domain, field.values);
  CHECK(((flow.rho * flow.u) - grad.gx2).abs().maxCoeff() < 1e-12);
  CHECK(((flow.rho * flow.v) + grad.gx1).abs().maxCoeff() < 1e-12);
}
