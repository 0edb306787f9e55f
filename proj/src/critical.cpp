#include "nozzleflow/critical.hpp"

#include <cmath>

namespace nozzleflow {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::subsonic: return "subsonic";
    case Classification::margin_violated: return "margin_violated";
    case Classification::non_converged: return "non_converged";
  }
  return "unknown";
}

ClassifyResult classify(const SolveContext& ctx, double m, double eps,
                        const std::optional<Eigen::ArrayXXd>& warm) {
  if (!(m > 0.0)) throw std::domain_error("classify: mass flux must be positive");
  ClassifyResult out;
  out.m = m;
  out.epsilon = eps;

  FarFieldStates ff;
  try {
    ff.upstream = solve_upstream(ctx.profiles, ctx.gas, m);
    ff.downstream = solve_downstream(ff.upstream, ctx.profiles, ctx.gas,
                                     ctx.walls.exit_width(), ctx.walls.exit_lower());
  } catch (const std::exception& e) {
    out.cls = Classification::non_converged;
    out.cause = std::string("far field: ") + e.what();
    return out;
  }

  SolverConfig cfg = ctx.config;
  cfg.epsilon = eps;
  StreamField field;
  try {
    field = solve(ctx.domain, ctx.profiles, ff, ctx.gas, m, cfg, warm);
  } catch (const picard_error& e) {
    out.cls = Classification::non_converged;
    out.cause = e.what();
    return out;
  }

  out.margin = field.max_margin;
  if (field.cutoff_active || field.max_margin > -4.0 * eps)
    out.cls = Classification::margin_violated;
  else
    out.cls = Classification::subsonic;
  out.field = std::move(field);
  return out;
}

CriticalFluxResult find_critical(const SolveContext& ctx, double m_seed,
                                 double tol_m) {
  if (!(tol_m > 0.0)) throw std::domain_error("find_critical: tol_m must be positive");
  CriticalFluxResult res;

  double eps = ctx.config.epsilon;
  if (!(eps > 0.0)) {
    try {
      const UpstreamState up = solve_upstream(ctx.profiles, ctx.gas, m_seed);
      eps = auto_epsilon(up, ctx.profiles, ctx.gas);
    } catch (const std::exception& e) {
      throw std::domain_error(
          std::string("find_critical: seed mass flux is not subsonic (") + e.what() +
          ")");
    }
  }
  const double eps_floor = 1e-3 * eps;  // scale 1e-6 against the default 1e-3
  res.epsilon_sequence.push_back(eps);

  // Continuation: each attempt starts from the previous subsonic field,
  // rescaled to the new flux so the Dirichlet data already matches.
  std::optional<Eigen::ArrayXXd> warm_field;
  double warm_m = m_seed;
  auto attempt = [&](double m) {
    std::optional<Eigen::ArrayXXd> warm;
    if (warm_field) warm = (*warm_field) * (m / warm_m);
    ClassifyResult c = classify(ctx, m, eps, warm);
    res.curve.push_back({c.m, c.margin, c.cls, eps});
    if (c.cls == Classification::subsonic) {
      warm_field = c.field->values;
      warm_m = m;
    }
    return c;
  };

  ClassifyResult seed = attempt(m_seed);
  if (seed.cls != Classification::subsonic)
    throw std::domain_error("find_critical: seed mass flux is not subsonic (" +
                            to_string(seed.cls) + ")");
  res.m_lo = m_seed;
  res.margin_at_lo = seed.margin;

  // Expanding scan for the first non-subsonic classification.
  auto expand_up = [&](double from) {
    double m = from;
    for (int k = 0; k < 64; ++k) {
      const double m_next = 1.25 * m;
      ClassifyResult c = attempt(m_next);
      if (c.cls == Classification::subsonic) {
        res.m_lo = m_next;
        res.margin_at_lo = c.margin;
        m = m_next;
      } else {
        res.m_hi = m_next;
        res.hi_class = c.cls;
        return;
      }
    }
    throw std::runtime_error("find_critical: no upper bound found for the sweep");
  };
  expand_up(m_seed);

  int guard = 0;
  while (guard++ < 64) {
    while (res.m_hi - res.m_lo > tol_m) {
      const double mid = 0.5 * (res.m_lo + res.m_hi);
      ClassifyResult c = attempt(mid);
      if (c.cls == Classification::subsonic) {
        res.m_lo = mid;
        res.margin_at_lo = c.margin;
      } else {
        res.m_hi = mid;
        res.hi_class = c.cls;
      }
    }
    // The bracket is tight. A margin violation at the top may be an artifact
    // of the finite cut-off margin: shrink it and look again.
    if (res.hi_class == Classification::margin_violated && eps > eps_floor) {
      eps = std::max(0.5 * eps, eps_floor);
      res.epsilon_sequence.push_back(eps);
      ClassifyResult c = attempt(res.m_hi);
      if (c.cls == Classification::subsonic) {
        res.m_lo = res.m_hi;
        res.margin_at_lo = c.margin;
        expand_up(res.m_lo);
      } else {
        res.hi_class = c.cls;
        if (c.cls != Classification::margin_violated) break;
      }
    } else {
      break;
    }
  }

  res.epsilon_final = eps;
  return res;
}

}  // namespace nozzleflow
