#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nozzleflow/solver.hpp"

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

}  // namespace

TEST_CASE("initial guess is the wall formula") {
  auto dom = FlattenedDomain::truncate(NozzleWalls::straight(), 10.0, 11, 11);
  auto f = initial_guess(dom, 1.0);
  CHECK(f.values(3, 5) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(f.values(0, 2) == 0.0);
  CHECK(f.values(10, 7) == 1.0);
}

TEST_CASE("boundary data modes coincide for constant data") {
  auto ctx = make_ctx(NozzleWalls::tanh_family(0.0, 1.2, 2.0), constant_profiles(),
                      2.0, 0.3, 25.0, 41, 21);
  auto far = boundary_data(ctx.domain, &ctx.ff, 0.3, FaceBcMode::farfield);
  auto wall = boundary_data(ctx.domain, nullptr, 0.3, FaceBcMode::wallformula);
  CHECK((far.left - wall.left).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((far.right - wall.right).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(far.left(0) == 0.0);
  CHECK(far.right(0) == 0.0);
  CHECK(far.left(20) == 0.3);
}

TEST_CASE("boundary data modes differ by the oscillation size for varying data") {
  Profiles pr{Profile1D::constant(1.0),
              Profile1D::polynomial(Eigen::Vector2d(1.0, -0.05))};
  auto ctx = make_ctx(NozzleWalls::tanh_family(0.0, 1.2, 2.0), pr, 2.0, 0.3, 25.0,
                      41, 21);
  auto far = boundary_data(ctx.domain, &ctx.ff, 0.3, FaceBcMode::farfield);
  auto wall = boundary_data(ctx.domain, nullptr, 0.3, FaceBcMode::wallformula);
  const double diff = (far.left - wall.left).cwiseAbs().maxCoeff();
  CHECK(diff > 1e-5);
  CHECK(diff < 2.0 * 0.05 * 0.3);
}

TEST_CASE("assembled system vanishes on the exact straight-channel field") {
  auto ctx = make_ctx(NozzleWalls::straight(), constant_profiles(), 2.0, 0.4, 10.0,
                      21, 11);
  SolverConfig cfg;
  auto setup = make_setup(ctx.ff, ctx.profiles, ctx.gas, cfg);
  auto bc = boundary_data(ctx.domain, &ctx.ff, 0.4, FaceBcMode::farfield);
  auto psi = initial_guess(ctx.domain, 0.4);
  auto sys = assemble(psi.values, ctx.domain, setup.ext, setup.cutoff, ctx.gas, bc);
  CHECK(sys.load.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sys.residual(psi.values).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(sys.cutoff_cells == 0);
}

TEST_CASE("stencil rows annihilate constants") {
  auto ctx = make_ctx(NozzleWalls::tanh_family(0.1, 1.3, 1.5), constant_profiles(),
                      2.0, 0.3, 8.0, 9, 7);
  SolverConfig cfg;
  auto setup = make_setup(ctx.ff, ctx.profiles, ctx.gas, cfg);
  auto bc = boundary_data(ctx.domain, &ctx.ff, 0.3, FaceBcMode::farfield);
  auto psi = initial_guess(ctx.domain, 0.3);
  auto sys = assemble(psi.values, ctx.domain, setup.ext, setup.cutoff, ctx.gas, bc);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(ctx.domain.num_nodes());
  CHECK((sys.A_glob * ones).cwiseAbs().maxCoeff() < 1e-13);

  // Minimal 3x3 grid: a single interior row, still a zero row sum.
  auto dom3 = FlattenedDomain::truncate(ctx.walls, 8.0, 3, 3);
  auto psi3 = initial_guess(dom3, 0.3);
  auto bc3 = boundary_data(dom3, &ctx.ff, 0.3, FaceBcMode::farfield);
  auto sys3 = assemble(psi3.values, dom3, setup.ext, setup.cutoff, ctx.gas, bc3);
  CHECK((sys3.A_glob * Eigen::VectorXd::Ones(9)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("assembled matrix is symmetric on a varying nozzle") {
  auto ctx = make_ctx(NozzleWalls::tanh_family(0.05, 1.25, 1.0), constant_profiles(),
                      2.0, 0.25, 6.0, 17, 9);
  SolverConfig cfg;
  auto setup = make_setup(ctx.ff, ctx.profiles, ctx.gas, cfg);
  auto bc = boundary_data(ctx.domain, &ctx.ff, 0.25, FaceBcMode::farfield);
  // A mildly wavy frozen field exercises the state-dependent coefficients.
  auto psi = initial_guess(ctx.domain, 0.25);
  for (int i = 0; i < ctx.domain.nx; ++i)
    for (int j = 0; j < ctx.domain.ny; ++j)
      psi.values(j, i) += 0.005 * std::sin(i * 0.7) * std::sin(j * 1.3);
  auto sys = assemble(psi.values, ctx.domain, setup.ext, setup.cutoff, ctx.gas, bc);
  Eigen::SparseMatrix<double> AT = sys.A.transpose();
  double asym = 0.0;
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, k); it; ++it)
      asym = std::max(asym, std::abs(it.value() - AT.coeff(it.row(), it.col())));
  CHECK(asym < 1e-14);
}

TEST_CASE("straight-channel rows are weakly diagonally dominant") {
  // Without metric cross terms every off-diagonal entry is nonpositive and
  // each interior row balances its neighbors.
  auto ctx = make_ctx(NozzleWalls::straight(), constant_profiles(), 2.0, 0.4, 10.0,
                      15, 9);
  SolverConfig cfg;
  auto setup = make_setup(ctx.ff, ctx.profiles, ctx.gas, cfg);
  auto bc = boundary_data(ctx.domain, &ctx.ff, 0.4, FaceBcMode::farfield);
  auto psi = initial_guess(ctx.domain, 0.4);
  auto sys = assemble(psi.values, ctx.domain, setup.ext, setup.cutoff, ctx.gas, bc);
  for (int k = 0; k < sys.A.outerSize(); ++k) {
    double diag = 0.0, off = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, k); it; ++it) {
      if (it.row() == it.col()) diag = it.value();
      else {
        CHECK(it.value() <= 1e-15);
        off += std::abs(it.value());
      }
    }
    CHECK(diag >= off - 1e-12);
  }
}

TEST_CASE("inner solve recovers a manufactured field") {
  auto ctx = make_ctx(NozzleWalls::tanh_family(0.0, 1.2, 2.0), constant_profiles(),
                      2.0, 0.3, 10.0, 31, 15);
  SolverConfig cfg;
  auto setup = make_setup(ctx.ff, ctx.profiles, ctx.gas, cfg);
  auto bc = boundary_data(ctx.domain, &ctx.ff, 0.3, FaceBcMode::farfield);
  auto psi = initial_guess(ctx.domain, 0.3);
  auto sys = assemble(psi.values, ctx.domain, setup.ext, setup.cutoff, ctx.gas, bc);

  const int n = sys.nxi * sys.nyi;
  Eigen::VectorXd target(n);
  for (int i = 1; i < ctx.domain.nx - 1; ++i)
    for (int j = 1; j < ctx.domain.ny - 1; ++j) {
      const double t1 = ctx.domain.t1(i), t2 = ctx.domain.t2(j);
      target((i - 1) * sys.nyi + (j - 1)) = 0.1 * t1 * t1 - 0.2 * t1 * t2 + t2 * t2;
    }
  Eigen::VectorXd rhs = sys.A * target;
  auto lin = pcg_solve(sys.A, rhs, Eigen::VectorXd::Zero(n), 1e-13, 20000);
  CHECK((lin.x - target).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(lin.ritz_min > 0.0);
}

TEST_CASE("inner solve reports stagnation on a singular system") {
  // Pure-Neumann 1D difference operator with an incompatible right side.
  const int n = 40;
  Eigen::SparseMatrix<double> A(n, n);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    double d = 2.0;
    if (i == 0 || i == n - 1) d = 1.0;
    t.emplace_back(i, i, d);
    if (i > 0) t.emplace_back(i, i - 1, -1.0);
    if (i < n - 1) t.emplace_back(i, i + 1, -1.0);
  }
  A.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  CHECK_THROWS_AS(pcg_solve(A, b, Eigen::VectorXd::Zero(n), 1e-12, 300),
                  inner_solve_error);
  try {
    pcg_solve(A, b, Eigen::VectorXd::Zero(n), 1e-12, 300);
  } catch (const inner_solve_error& e) {
    CHECK(e.residual_history().size() > 1);
  }
}

TEST_CASE("inner solve rejects an indefinite matrix") {
  Eigen::SparseMatrix<double> A(2, 2);
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 1.0}};
  A.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd b(2);
  b << 1.0, -0.3;
  CHECK_THROWS_AS(pcg_solve(A, b, Eigen::VectorXd::Zero(2), 1e-12, 50),
                  inner_solve_error);
}

TEST_CASE("straight channel solves exactly in at most two sweeps") {
  auto ctx = make_ctx(NozzleWalls::straight(), constant_profiles(), 2.0, 0.4, 10.0,
                      21, 11);
  SolverConfig cfg;
  auto field = solve(ctx.domain, ctx.profiles, ctx.ff, ctx.gas, 0.4, cfg);
  CHECK(field.converged);
  CHECK(field.iterations <= 2);
  CHECK_FALSE(field.cutoff_active);
  double worst = 0.0;
  for (int i = 0; i < ctx.domain.nx; ++i)
    for (int j = 0; j < ctx.domain.ny; ++j)
      worst = std::max(worst,
                       std::abs(field.values(j, i) - 0.4 * ctx.domain.t2(j)));
  CHECK(worst < 1e-10);
}

TEST_CASE("tanh nozzle solve satisfies the maximum principle and monotonicity") {
  auto ctx = make_ctx(NozzleWalls::tanh_family(0.0, 1.2, 2.0), constant_profiles(),
                      2.0, 0.3, 25.0, 101, 26);
  SolverConfig cfg;
  auto field = solve(ctx.domain, ctx.profiles, ctx.ff, ctx.gas, 0.3, cfg);
  CHECK(field.converged);
  CHECK_FALSE(field.cutoff_active);
  CHECK(field.ritz_min > 0.0);
  const double tol = cfg.tol_update * 0.3;
  CHECK(field.values.minCoeff() >= -tol);
  CHECK(field.values.maxCoeff() <= 0.3 * (1.0 + cfg.tol_update));
  for (int i = 1; i < ctx.domain.nx - 1; ++i)
    for (int j = 1; j < ctx.domain.ny - 1; ++j)
      CHECK(field.values(j + 1, i) - field.values(j - 1, i) > 0.0);
}

TEST_CASE("distinct initial guesses land on the same field") {
  auto ctx = make_ctx(NozzleWalls::tanh_family(0.0, 1.2, 2.0), constant_profiles(),
                      2.0, 0.3, 15.0, 61, 21);
  SolverConfig cfg;
  auto a = solve(ctx.domain, ctx.profiles, ctx.ff, ctx.gas, 0.3, cfg);

  Eigen::ArrayXXd cubic(ctx.domain.ny, ctx.domain.nx);
  for (int i = 0; i < ctx.domain.nx; ++i)
    for (int j = 0; j < ctx.domain.ny; ++j) {
      const double t2 = ctx.domain.t2(j);
      cubic(j, i) = 0.3 * t2 * t2 * (3.0 - 2.0 * t2);
    }
  auto b = solve(ctx.domain, ctx.profiles, ctx.ff, ctx.gas, 0.3, cfg, cubic);
  CHECK((a.values - b.values).abs().maxCoeff() <= 10.0 * cfg.tol_update * 0.3);
}

TEST_CASE("solution differences contract at second order") {
  Profiles pr{Profile1D::polynomial(Eigen::Vector3d(1.0, 0.01, -0.01)),
              Profile1D::constant(1.0)};
  const double m = 0.3, L = 10.0;
  auto walls = NozzleWalls::straight();
  SolverConfig cfg;

  auto run = [&](int nx, int ny) {
    auto ctx = make_ctx(walls, pr, 2.0, m, L, nx, ny);
    return solve(ctx.domain, ctx.profiles, ctx.ff, ctx.gas, m, cfg);
  };
  auto f1 = run(51, 13);
  auto f2 = run(101, 25);
  auto f3 = run(201, 49);

  auto diff_on_coarse = [](const StreamField& coarse, const StreamField& fine) {
    double worst = 0.0;
    for (int i = 0; i < coarse.grid.nx; ++i)
      for (int j = 0; j < coarse.grid.ny; ++j)
        worst = std::max(worst, std::abs(coarse.values(j, i) - fine.values(2 * j, 2 * i)));
    return worst;
  };
  const double e12 = diff_on_coarse(f1, f2);
  const double e23 = diff_on_coarse(f2, f3);
  CHECK(e12 / e23 > 3.0);
  CHECK(e12 / e23 < 5.0);
}

TEST_CASE("solver configuration is validated") {
  SolverConfig cfg;
  cfg.relaxation = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::domain_error);
  cfg.relaxation = 0.7;
  cfg.tol_update = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::domain_error);
}
