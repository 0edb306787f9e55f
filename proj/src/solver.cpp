#include "nozzleflow/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace nozzleflow {

namespace {

inline int full_index(int i, int j, int ny) { return i * ny + j; }

Eigen::Map<const Eigen::VectorXd> as_vector(const Eigen::ArrayXXd& psi) {
  return {psi.data(), psi.size()};
}

Eigen::VectorXd interior_of(const Eigen::ArrayXXd& psi) {
  const int ny = static_cast<int>(psi.rows());
  const int nx = static_cast<int>(psi.cols());
  Eigen::VectorXd v((nx - 2) * (ny - 2));
  for (int i = 1; i < nx - 1; ++i)
    for (int j = 1; j < ny - 1; ++j)
      v((i - 1) * (ny - 2) + (j - 1)) = psi(j, i);
  return v;
}

void set_interior(Eigen::ArrayXXd& psi, const Eigen::VectorXd& v) {
  const int ny = static_cast<int>(psi.rows());
  const int nx = static_cast<int>(psi.cols());
  for (int i = 1; i < nx - 1; ++i)
    for (int j = 1; j < ny - 1; ++j)
      psi(j, i) = v((i - 1) * (ny - 2) + (j - 1));
}

// Smallest/largest eigenvalue of the Lanczos tridiagonal accumulated from the
// CG coefficients.
void ritz_estimates(const std::vector<double>& alpha, const std::vector<double>& beta,
                    double& ritz_min, double& ritz_max) {
  const int n = std::min<int>(static_cast<int>(alpha.size()), 2000);
  if (n == 0) {
    ritz_min = ritz_max = 0.0;
    return;
  }
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
  for (int k = 0; k < n; ++k) {
    diag(k) = 1.0 / alpha[k];
    if (k > 0) diag(k) += beta[k - 1] / alpha[k - 1];
    if (k < n - 1) sub(k) = std::sqrt(std::max(beta[k], 0.0)) / alpha[k];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub.head(std::max(n - 1, 0)),
                            Eigen::EigenvaluesOnly);
  ritz_min = es.eigenvalues().minCoeff();
  ritz_max = es.eigenvalues().maxCoeff();
}

}  // namespace

PcgResult pcg_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& x0, double tol, int max_iter,
                    double abs_tol) {
  PcgResult out;
  const Eigen::VectorXd diag = A.diagonal();
  if ((diag.array() <= 0.0).any())
    throw inner_solve_error("pcg: nonpositive diagonal entry, matrix not SPD", {});
  const Eigen::VectorXd inv_diag = diag.cwiseInverse();

  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = b - A * x;
  const double bnorm = b.norm();
  const double target = std::max(tol * std::max(bnorm, 1e-300), abs_tol);
  out.residual_history.push_back(r.norm());
  if (r.norm() <= target) {
    out.x = std::move(x);
    out.rel_residual = out.residual_history.back() / std::max(bnorm, 1e-300);
    return out;
  }

  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  std::vector<double> alphas, betas;

  for (int k = 0; k < max_iter; ++k) {
    const Eigen::VectorXd Ap = A * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) {
      ritz_estimates(alphas, betas, out.ritz_min, out.ritz_max);
      throw inner_solve_error("pcg: nonpositive curvature, matrix not SPD",
                              out.residual_history);
    }
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    if ((k + 1) % 64 == 0) r = b - A * x;  // periodic true-residual refresh
    const double rn = r.norm();
    out.residual_history.push_back(rn);
    alphas.push_back(alpha);
    if (rn <= target) {
      out.x = std::move(x);
      out.iterations = k + 1;
      out.rel_residual = rn / std::max(bnorm, 1e-300);
      ritz_estimates(alphas, betas, out.ritz_min, out.ritz_max);
      return out;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    const double beta = rz_new / rz;
    betas.push_back(beta);
    p = z + beta * p;
    rz = rz_new;
  }
  ritz_estimates(alphas, betas, out.ritz_min, out.ritz_max);
  throw inner_solve_error("pcg: stagnated after " + std::to_string(max_iter) +
                              " iterations, relative residual " +
                              std::to_string(out.residual_history.back() /
                                             std::max(bnorm, 1e-300)),
                          out.residual_history);
}

void DirichletData::apply(Eigen::ArrayXXd& psi) const {
  const int ny = static_cast<int>(psi.rows());
  const int nx = static_cast<int>(psi.cols());
  for (int j = 0; j < ny; ++j) {
    psi(j, 0) = left(j);
    psi(j, nx - 1) = right(j);
  }
  for (int i = 0; i < nx; ++i) {
    psi(0, i) = bottom;
    psi(ny - 1, i) = top;
  }
}

StreamField initial_guess(const FlattenedDomain& domain, double m) {
  StreamField f;
  f.grid = domain;
  f.m = m;
  f.values.resize(domain.ny, domain.nx);
  for (int i = 0; i < domain.nx; ++i)
    for (int j = 0; j < domain.ny; ++j) f.values(j, i) = m * domain.t2(j);
  return f;
}

DirichletData boundary_data(const FlattenedDomain& domain,
                            const FarFieldStates* farfield, double m,
                            FaceBcMode mode) {
  DirichletData bc;
  bc.bottom = 0.0;
  bc.top = m;
  bc.left.resize(domain.ny);
  bc.right.resize(domain.ny);
  for (int j = 0; j < domain.ny; ++j) {
    const double t2 = domain.t2(j);
    if (mode == FaceBcMode::wallformula) {
      bc.left(j) = m * t2;
      bc.right(j) = m * t2;
    } else {
      if (farfield == nullptr)
        throw std::invalid_argument("boundary_data: farfield mode needs solved states");
      bc.left(j) = farfield->upstream.psi_bar(domain.x2_node(0, j));
      bc.right(j) = farfield->downstream.psi_bar(domain.x2_node(domain.nx - 1, j));
    }
  }
  // Wall values take precedence at the corners.
  bc.left(0) = bc.right(0) = 0.0;
  bc.left(domain.ny - 1) = bc.right(domain.ny - 1) = m;
  return bc;
}

LinearSystem assemble(const Eigen::ArrayXXd& psi_k, const FlattenedDomain& domain,
                      const ExtendedProfiles& ext, const CutOff& cutoff,
                      const GasModel& gas, const DirichletData& bc) {
  const int nx = domain.nx, ny = domain.ny;
  const int nxi = nx - 2, nyi = ny - 2;
  const double h1 = domain.h1, h2 = domain.h2;
  if (!psi_k.allFinite())
    throw std::runtime_error("assemble: non-finite entry in the frozen field");

  LinearSystem sys;
  sys.nxi = nxi;
  sys.nyi = nyi;
  sys.load = Eigen::VectorXd::Zero(nxi * nyi);

  std::vector<Eigen::Triplet<double>> trip_glob;
  trip_glob.reserve(static_cast<size_t>(nx) * ny * 9);

  // Corner offsets within a cell: SW, SE, NW, NE.
  const int di[4] = {0, 1, 0, 1};
  const int dj[4] = {0, 0, 1, 1};
  // Difference sign vectors for the bilinear element form.
  const double xs[4] = {-1.0, 1.0, 0.0, 0.0};   // SE - SW
  const double xn[4] = {0.0, 0.0, -1.0, 1.0};   // NE - NW
  const double yw[4] = {-1.0, 0.0, 1.0, 0.0};   // NW - SW
  const double ye[4] = {0.0, -1.0, 0.0, 1.0};   // NE - SE

  for (int ci = 0; ci < nx - 1; ++ci) {
    const double H = domain.H_mid(ci);
    for (int cj = 0; cj < ny - 1; ++cj) {
      const double t2c = (cj + 0.5) * h2;
      const double slope = domain.dt2dx1_mid(ci, t2c);

      const double pSW = psi_k(cj, ci), pSE = psi_k(cj, ci + 1);
      const double pNW = psi_k(cj + 1, ci), pNE = psi_k(cj + 1, ci + 1);
      const double psi_c = 0.25 * (pSW + pSE + pNW + pNE);
      const double gt1 = (pSE - pSW + pNE - pNW) / (2.0 * h1);
      const double gt2 = (pNW - pSW + pNE - pSE) / (2.0 * h2);
      const double gx1 = gt1 + gt2 * slope;
      const double gx2 = gt2 / H;
      const double q = gx1 * gx1 + gx2 * gx2;

      const auto td = truncated_density_full(q, psi_c, ext, cutoff, gas);
      if (td.cutoff_active) ++sys.cutoff_cells;
      const double rho = td.rho;

      const double K11 = H / rho;
      const double K12 = H * slope / rho;
      const double K22 = H * (slope * slope + 1.0 / (H * H)) / rho;
      const double Cx = K11 * h2 / (2.0 * h1);
      const double Cy = K22 * h1 / (2.0 * h2);
      const double Cc = 0.25 * K12;

      // Source, frozen at the cell state.
      const double f_c = ext.dB(psi_c) * rho -
                         ext.dS(psi_c) * std::pow(rho, gas.gamma) / gas.gamma;
      const double load_c = -H * f_c * (h1 * h2 / 4.0);

      int idx[4];
      bool interior[4];
      int red[4];
      for (int c = 0; c < 4; ++c) {
        const int i = ci + di[c], j = cj + dj[c];
        idx[c] = full_index(i, j, ny);
        interior[c] = (i > 0 && i < nx - 1 && j > 0 && j < ny - 1);
        red[c] = interior[c] ? (i - 1) * nyi + (j - 1) : -1;
      }

      for (int p = 0; p < 4; ++p) {
        if (!interior[p]) continue;
        sys.load(red[p]) += load_c;
        for (int qq = 0; qq < 4; ++qq) {
          const double e =
              Cx * (xs[p] * xs[qq] + xn[p] * xn[qq]) +
              Cy * (yw[p] * yw[qq] + ye[p] * ye[qq]) +
              Cc * ((xs[p] + xn[p]) * (yw[qq] + ye[qq]) +
                    (yw[p] + ye[p]) * (xs[qq] + xn[qq]));
          if (e != 0.0) trip_glob.emplace_back(red[p], idx[qq], e);
          if (!std::isfinite(e))
            throw std::runtime_error("assemble: non-finite coefficient at cell (" +
                                     std::to_string(ci) + "," + std::to_string(cj) + ")");
        }
      }
    }
  }

  sys.A_glob.resize(nxi * nyi, nx * ny);
  sys.A_glob.setFromTriplets(trip_glob.begin(), trip_glob.end());

  // Reduced SPD matrix: interior columns of the global rows.
  std::vector<Eigen::Triplet<double>> trip_red;
  trip_red.reserve(trip_glob.size());
  for (int k = 0; k < sys.A_glob.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A_glob, k); it; ++it) {
      const int i = static_cast<int>(it.col()) / ny;
      const int j = static_cast<int>(it.col()) % ny;
      if (i > 0 && i < nx - 1 && j > 0 && j < ny - 1)
        trip_red.emplace_back(static_cast<int>(it.row()), (i - 1) * nyi + (j - 1),
                              it.value());
    }
  sys.A.resize(nxi * nyi, nxi * nyi);
  sys.A.setFromTriplets(trip_red.begin(), trip_red.end());

  // Lift the Dirichlet data: b = load - A_glob * (boundary-only field).
  Eigen::ArrayXXd g = Eigen::ArrayXXd::Zero(ny, nx);
  bc.apply(g);
  sys.b = sys.load - sys.A_glob * as_vector(g);
  return sys;
}

Eigen::VectorXd LinearSystem::residual(const Eigen::ArrayXXd& psi_full) const {
  return A_glob * as_vector(psi_full) - load;
}

GradientField gradient_field(const FlattenedDomain& domain,
                             const Eigen::ArrayXXd& psi) {
  const int nx = domain.nx, ny = domain.ny;
  const double h1 = domain.h1, h2 = domain.h2;
  GradientField g;
  g.gx1.resize(ny, nx);
  g.gx2.resize(ny, nx);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      double dt1, dt2;
      if (i == 0)
        dt1 = (-3.0 * psi(j, 0) + 4.0 * psi(j, 1) - psi(j, 2)) / (2.0 * h1);
      else if (i == nx - 1)
        dt1 = (3.0 * psi(j, nx - 1) - 4.0 * psi(j, nx - 2) + psi(j, nx - 3)) / (2.0 * h1);
      else
        dt1 = (psi(j, i + 1) - psi(j, i - 1)) / (2.0 * h1);
      if (j == 0)
        dt2 = (-3.0 * psi(0, i) + 4.0 * psi(1, i) - psi(2, i)) / (2.0 * h2);
      else if (j == ny - 1)
        dt2 = (3.0 * psi(ny - 1, i) - 4.0 * psi(ny - 2, i) + psi(ny - 3, i)) / (2.0 * h2);
      else
        dt2 = (psi(j + 1, i) - psi(j - 1, i)) / (2.0 * h2);
      g.gx1(j, i) = dt1 + dt2 * domain.dt2dx1_node(i, domain.t2(j));
      g.gx2(j, i) = dt2 / domain.H_node(i);
    }
  }
  return g;
}

double auto_epsilon(const UpstreamState& upstream, const Profiles& profiles,
                    const GasModel& gas) {
  double scale = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 200; ++i) {
    const double x2 = i / 200.0;
    const double S = profiles.S.value(x2);
    const double rho = upstream.rho0(x2);
    scale = std::min(scale, gas.gm1() * S * std::pow(rho, gas.gp1()));
  }
  return 1e-3 * scale;
}

SolveSetup make_setup(const FarFieldStates& farfield, const Profiles& profiles,
                      const GasModel& gas, const SolverConfig& config) {
  const double eps = config.epsilon > 0.0
                         ? config.epsilon
                         : auto_epsilon(farfield.upstream, profiles, gas);
  ExtendedProfiles ext(compose_with_kappa(farfield.upstream, profiles, gas));
  return {std::move(ext), CutOff(eps), eps};
}

StreamField solve(const FlattenedDomain& domain, const Profiles& profiles,
                  const FarFieldStates& farfield, const GasModel& gas, double m,
                  const SolverConfig& config,
                  const std::optional<Eigen::ArrayXXd>& initial) {
  config.validate();
  SolveSetup setup = make_setup(farfield, profiles, gas, config);
  const DirichletData bc = boundary_data(domain, &farfield, m, config.face_bc);

  StreamField field = initial_guess(domain, m);
  if (initial) {
    if (initial->rows() != domain.ny || initial->cols() != domain.nx)
      throw std::invalid_argument("solve: initial guess has the wrong shape");
    field.values = *initial;
  }
  bc.apply(field.values);
  field.epsilon = setup.epsilon;
  field.ritz_min = std::numeric_limits<double>::infinity();

  const double tol_update = config.tol_update * m;
  const double tol_residual =
      config.tol_residual > 0.0 ? config.tol_residual : 1e-8 * m / (2.0 * domain.L);

  double last_update = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < config.max_picard; ++iter) {
    LinearSystem sys;
    try {
      sys = assemble(field.values, domain, setup.ext, setup.cutoff, gas, bc);
    } catch (const std::exception& e) {
      throw picard_error(std::string("solve: assembly failed: ") + e.what(), field);
    }
    const Eigen::VectorXd rnl = sys.residual(field.values);
    const double res_weak = rnl.cwiseAbs().maxCoeff();
    field.history.push_back({iter, last_update, res_weak, sys.cutoff_cells});
    field.final_residual = res_weak;

    if (iter > 0 && last_update <= tol_update && res_weak <= tol_residual) {
      field.converged = true;
      break;
    }

    // Inexact forcing: early sweeps only need the inner residual a couple of
    // orders below the outer one; near convergence the inner solve must beat
    // the outer residual tolerance outright.
    const double bnorm = sys.b.norm();
    const double eff_rel = std::min(
        config.linear_tol, 0.2 * tol_residual / std::max(bnorm, 1e-300));
    const double lazy_abs = 0.02 * rnl.norm();
    PcgResult lin;
    try {
      lin = pcg_solve(sys.A, sys.b, interior_of(field.values), eff_rel,
                      config.linear_max_iter, lazy_abs);
    } catch (const inner_solve_error& e) {
      throw picard_error(std::string("solve: inner solve failed: ") + e.what(), field);
    }
    if (lin.iterations > 0) field.ritz_min = std::min(field.ritz_min, lin.ritz_min);

    const Eigen::VectorXd cur = interior_of(field.values);
    last_update = (lin.x - cur).cwiseAbs().maxCoeff();
    set_interior(field.values,
                 (1.0 - config.relaxation) * cur + config.relaxation * lin.x);
    field.iterations = iter + 1;
  }

  if (!field.converged)
    throw picard_error("solve: no convergence within " +
                           std::to_string(config.max_picard) + " outer iterations",
                       field);

  // Margin scan at the converged field decides whether the cut-off ever
  // engages; an engaged cut-off means the regularized and the physical
  // problems may differ.
  const GradientField grad = gradient_field(domain, field.values);
  field.cutoff_active = false;
  field.max_margin = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < domain.nx; ++i)
    for (int j = 0; j < domain.ny; ++j) {
      const double q = grad.gx1(j, i) * grad.gx1(j, i) + grad.gx2(j, i) * grad.gx2(j, i);
      const auto td =
          truncated_density_full(q, field.values(j, i), setup.ext, setup.cutoff, gas);
      field.max_margin = std::max(field.max_margin, td.margin);
      if (td.cutoff_active) field.cutoff_active = true;
    }
  return field;
}

}  // namespace nozzleflow
