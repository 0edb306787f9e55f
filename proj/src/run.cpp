#include "nozzleflow/run.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nozzleflow/csv_io.hpp"
#include "nozzleflow/diagnostics.hpp"

namespace nozzleflow {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

SolveContext make_context(const RunConfig& cfg) {
  return {cfg.walls,
          FlattenedDomain::truncate(cfg.walls, cfg.half_length(), cfg.grid.nx,
                                    cfg.grid.ny),
          cfg.profiles, cfg.gas(), cfg.solver};
}

FarFieldStates solve_farfield(const RunConfig& cfg, double m) {
  FarFieldStates ff;
  ff.upstream = solve_upstream(cfg.profiles, cfg.gas(), m);
  ff.downstream = solve_downstream(ff.upstream, cfg.profiles, cfg.gas(),
                                   cfg.effective_width(), cfg.walls.exit_lower());
  return ff;
}

double pick_m(const RunConfig& cfg) {
  if (cfg.m) return *cfg.m;
  if (cfg.sweep) return cfg.sweep->m_seed;
  if (!cfg.m_list.empty()) return cfg.m_list.front();
  throw config_error({"a mass flux is required for this subcommand"});
}

// Flow columns for the dump; falls back to the regularized density wherever
// the physical subsonic root does not exist (margin-violated fields).
FlowField flow_for_dump(const StreamField& stream, const RunConfig& cfg,
                        const FarFieldStates& ff, bool* physical) {
  const GasModel gas = cfg.gas();
  *physical = !stream.cutoff_active;
  if (!stream.cutoff_active) {
    try {
      return reconstruct_flow(stream, cfg.profiles, ff.upstream, gas);
    } catch (const reconstruction_error&) {
      *physical = false;
    }
  }
  ExtendedProfiles ext(compose_with_kappa(ff.upstream, cfg.profiles, gas));
  CutOff cutoff(stream.epsilon);
  const FlattenedDomain& dom = stream.grid;
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
  for (int i = 0; i < dom.nx; ++i)
    for (int j = 0; j < dom.ny; ++j) {
      const double psi = stream.values(j, i);
      const double q = grad.gx1(j, i) * grad.gx1(j, i) + grad.gx2(j, i) * grad.gx2(j, i);
      const auto td = truncated_density_full(q, psi, ext, cutoff, gas);
      const double S = ext.S(psi);
      flow.rho(j, i) = td.rho;
      flow.u(j, i) = grad.gx2(j, i) / td.rho;
      flow.v(j, i) = -grad.gx1(j, i) / td.rho;
      flow.p(j, i) = pressure_from_density(gas, td.rho, S);
      flow.c2(j, i) = sound_speed_sq(gas, td.rho, S);
      flow.mach(j, i) = std::sqrt(q / (td.rho * td.rho * flow.c2(j, i)));
      flow.grad_sq(j, i) = q;
      flow.S_of_psi(j, i) = S;
      flow.B_of_psi(j, i) = ext.B(psi);
    }
  return flow;
}

void write_field_csv(const std::string& path, const StreamField& stream,
                     const FlowField& flow) {
  const FlattenedDomain& dom = stream.grid;
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<size_t>(dom.nx) * dom.ny);
  for (int i = 0; i < dom.nx; ++i)
    for (int j = 0; j < dom.ny; ++j)
      rows.push_back({dom.t1(i), dom.t2(j), dom.t1(i), dom.x2_node(i, j),
                      stream.values(j, i), flow.rho(j, i), flow.u(j, i),
                      flow.v(j, i), flow.p(j, i), flow.mach(j, i)});
  write_csv_atomic(path, "t1,t2,x1,x2,psi,rho,u,v,p,mach", rows);
}

void write_convergence_log(const std::string& path, const StreamField& stream) {
  std::ostringstream out;
  out << "# iteration update residual cutoff_cells\n";
  for (const auto& h : stream.history)
    out << h.iteration << ' '
        << (std::isfinite(h.update) ? format_double(h.update) : "inf") << ' '
        << format_double(h.residual) << ' ' << h.cutoff_cells << '\n';
  write_text_atomic(path, out.str());
}

ordered_json diagnostics_json(const DiagnosticsReport& rep, const RunConfig& cfg,
                              const StreamField& stream, const FarFieldStates& ff) {
  ordered_json j;
  j["M_margin"] = rep.M_margin;
  j["bounds_ok"] = rep.bounds_ok;
  j["monotone_ok"] = rep.monotone_ok;
  j["mass_flux_max_dev"] = rep.mass_flux_max_dev;
  j["bernoulli_drift"] = rep.bernoulli_drift;
  j["euler_residuals"] = {{"mass", rep.euler.mass.max},
                          {"mom1", rep.euler.mom1.max},
                          {"mom2", rep.euler.mom2.max},
                          {"energy", rep.euler.energy.max}};
  j["farfield_gap"] = rep.farfield_gap;
  j["entropy_drift"] = rep.entropy_drift;
  j["farfield_gap_discrete"] = rep.farfield_gap_discrete;
  j["max_mach"] = rep.max_mach;
  j["m"] = stream.m;
  j["p0"] = ff.upstream.p0();
  j["p1"] = ff.downstream.p1();
  j["epsilon"] = stream.epsilon;
  j["iterations"] = stream.iterations;
  j["final_residual"] = stream.final_residual;
  j["grid"] = {{"L", stream.grid.L}, {"nx", stream.grid.nx}, {"ny", stream.grid.ny}};
  j["gamma"] = cfg.gamma;
  return j;
}

int solve_into(const RunConfig& cfg, const std::string& out_dir) {
  const double m = pick_m(cfg);
  FarFieldStates ff;
  try {
    ff = solve_farfield(cfg, m);
  } catch (const std::exception& e) {
    std::cerr << "far-field solve failed: " << e.what() << "\n";
    return kExitNoConvergence;
  }

  SolveContext ctx = make_context(cfg);
  StreamField field;
  try {
    field = solve(ctx.domain, cfg.profiles, ff, cfg.gas(), m, cfg.solver);
  } catch (const picard_error& e) {
    std::cerr << e.what() << "\n";
    write_convergence_log(out_dir + "/convergence.log", e.last_field());
    return kExitNoConvergence;
  }

  bool physical = false;
  const FlowField flow = flow_for_dump(field, cfg, ff, &physical);
  write_field_csv(out_dir + "/field.csv", field, flow);
  write_convergence_log(out_dir + "/convergence.log", field);

  if (!physical) {
    std::cerr << "margin violated: the cut-off is active at the converged field "
                 "(max margin "
              << field.max_margin << ", epsilon " << field.epsilon << ")\n";
    return kExitMarginViolated;
  }

  const DiagnosticsReport rep = run_diagnostics(field, cfg.profiles, ff, cfg.gas());
  write_text_atomic(out_dir + "/diagnostics.json",
                    diagnostics_json(rep, cfg, field, ff).dump(2) + "\n");
  std::cout << "solved m=" << m << " iterations=" << field.iterations
            << " M_margin=" << rep.M_margin << " max_mach=" << rep.max_mach << "\n";
  return kExitOk;
}

}  // namespace

int run_farfield(const RunConfig& cfg) {
  const double m = pick_m(cfg);
  FarFieldStates ff;
  try {
    ff = solve_farfield(cfg, m);
  } catch (const std::exception& e) {
    std::cerr << "far-field solve failed: " << e.what() << "\n";
    return kExitNoConvergence;
  }
  const MassFluxRange range =
      mass_flux_range(cfg.profiles, cfg.gas(), cfg.effective_width());

  const int n = 201;
  std::vector<std::vector<double>> u0_rows, u1_rows, y_rows;
  for (int k = 0; k < n; ++k) {
    const double x2 = static_cast<double>(k) / (n - 1);
    u0_rows.push_back({x2, ff.upstream.rho0(x2), ff.upstream.u0(x2),
                       ff.upstream.psi_bar(x2)});
    const double y = ff.downstream.exit_lower() +
                     (ff.downstream.exit_upper() - ff.downstream.exit_lower()) * x2;
    u1_rows.push_back({y, ff.downstream.rho1_at_y(y), ff.downstream.u1_at_y(y),
                       ff.downstream.psi_bar(y)});
    y_rows.push_back({x2, ff.downstream.y_of_s(x2)});
  }
  write_csv_atomic(cfg.output_dir + "/u0.csv", "x2,rho0,u0,psi_bar", u0_rows);
  write_csv_atomic(cfg.output_dir + "/u1.csv", "y,rho1,u1,psi_bar", u1_rows);
  write_csv_atomic(cfg.output_dir + "/ymap.csv", "s,y", y_rows);

  ordered_json j;
  j["m"] = m;
  j["p0"] = ff.upstream.p0();
  j["p1"] = ff.downstream.p1();
  j["m_bar"] = range.m_bar;
  j["m_tilde_up"] = range.m_tilde_up;
  j["beta"] = range.beta;
  j["advisory_lower_gate"] =
      std::pow(oscillation_delta(cfg.profiles), range.beta);
  write_text_atomic(cfg.output_dir + "/farfield.json", j.dump(2) + "\n");
  std::cout << "p0=" << format_double(ff.upstream.p0())
            << " p1=" << format_double(ff.downstream.p1())
            << " m_bar=" << format_double(range.m_bar)
            << " m_tilde=" << format_double(range.m_tilde_up) << "\n";
  return kExitOk;
}

int run_solve(const RunConfig& cfg) { return solve_into(cfg, cfg.output_dir); }

int run_diagnose(const RunConfig& cfg) {
  const double m = pick_m(cfg);
  const std::string field_path = cfg.output_dir + "/field.csv";
  CsvTable table;
  try {
    table = read_csv(field_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  }
  SolveContext ctx = make_context(cfg);
  if (static_cast<int>(table.rows.size()) != ctx.domain.num_nodes()) {
    std::cerr << "field dump has " << table.rows.size() << " rows, grid expects "
              << ctx.domain.num_nodes() << "\n";
    return kExitError;
  }
  FarFieldStates ff;
  try {
    ff = solve_farfield(cfg, m);
  } catch (const std::exception& e) {
    std::cerr << "far-field solve failed: " << e.what() << "\n";
    return kExitNoConvergence;
  }

  StreamField field = initial_guess(ctx.domain, m);
  for (int i = 0; i < ctx.domain.nx; ++i)
    for (int j = 0; j < ctx.domain.ny; ++j)
      field.values(j, i) = table.rows[i * ctx.domain.ny + j][4];
  field.converged = true;
  field.epsilon = cfg.solver.epsilon > 0.0
                      ? cfg.solver.epsilon
                      : auto_epsilon(ff.upstream, cfg.profiles, cfg.gas());

  // Re-scan the margin before trusting the dump.
  SolveSetup setup = make_setup(ff, cfg.profiles, cfg.gas(), cfg.solver);
  const GradientField grad = gradient_field(ctx.domain, field.values);
  field.cutoff_active = false;
  field.max_margin = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < ctx.domain.nx; ++i)
    for (int j = 0; j < ctx.domain.ny; ++j) {
      const double q =
          grad.gx1(j, i) * grad.gx1(j, i) + grad.gx2(j, i) * grad.gx2(j, i);
      const auto td = truncated_density_full(q, field.values(j, i), setup.ext,
                                             setup.cutoff, cfg.gas());
      field.max_margin = std::max(field.max_margin, td.margin);
      if (td.cutoff_active) field.cutoff_active = true;
    }
  if (field.cutoff_active) {
    std::cerr << "margin violated in the stored field (max margin "
              << field.max_margin << ")\n";
    return kExitMarginViolated;
  }

  const DiagnosticsReport rep = run_diagnostics(field, cfg.profiles, ff, cfg.gas());
  const std::string doc = diagnostics_json(rep, cfg, field, ff).dump(2) + "\n";
  write_text_atomic(cfg.output_dir + "/diagnostics.json", doc);
  std::cout << doc;
  return kExitOk;
}

int run_critical(const RunConfig& cfg) {
  if (!cfg.sweep) {
    std::cerr << "critical needs a sweep section {m_seed, tol_m}\n";
    return kExitError;
  }
  SolveContext ctx = make_context(cfg);
  CriticalFluxResult res;
  try {
    res = find_critical(ctx, cfg.sweep->m_seed, cfg.sweep->tol_m);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitNoConvergence;
  }

  std::ostringstream curve;
  curve << "m,M,classification,epsilon\n";
  for (const auto& a : res.curve)
    curve << format_double(a.m) << ',' << format_double(a.margin) << ','
          << to_string(a.cls) << ',' << format_double(a.eps) << '\n';
  write_text_atomic(cfg.output_dir + "/margin_curve.csv", curve.str());

  ordered_json j;
  j["m_lo"] = res.m_lo;
  j["m_hi"] = res.m_hi;
  j["hi_classification"] = to_string(res.hi_class);
  j["margin_at_lo"] = res.margin_at_lo;
  j["epsilon_final"] = res.epsilon_final;
  j["epsilon_sequence"] = res.epsilon_sequence;
  j["attempts"] = res.curve.size();
  j["grid"] = {{"L", ctx.domain.L}, {"nx", ctx.domain.nx}, {"ny", ctx.domain.ny}};
  write_text_atomic(cfg.output_dir + "/critical.json", j.dump(2) + "\n");
  std::cout << "m_hat in [" << format_double(res.m_lo) << ", "
            << format_double(res.m_hi) << "] (" << to_string(res.hi_class)
            << " above, epsilon_final " << format_double(res.epsilon_final) << ")\n";
  return kExitOk;
}

int run_sweep(const RunConfig& cfg) {
  if (cfg.m_list.empty()) {
    std::cerr << "sweep needs a nonempty m_list\n";
    return kExitError;
  }
  int threads = cfg.threads;
  if (threads <= 0) {
    if (const char* env = std::getenv("NOZZLEFLOW_THREADS")) threads = std::atoi(env);
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min<int>(threads, static_cast<int>(cfg.m_list.size()));

  std::vector<int> codes(cfg.m_list.size(), kExitOk);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t k = next.fetch_add(1);
      if (k >= cfg.m_list.size()) return;
      RunConfig local = cfg;
      local.m = cfg.m_list[k];
      char tag[32];
      std::snprintf(tag, sizeof(tag), "m_%.6g", cfg.m_list[k]);
      local.output_dir = cfg.output_dir + "/" + tag;
      codes[k] = solve_into(local, local.output_dir);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int worst = kExitOk;
  for (size_t k = 0; k < codes.size(); ++k) {
    char tag[32];
    std::snprintf(tag, sizeof(tag), "%.6g", cfg.m_list[k]);
    std::cout << "m=" << tag << " exit=" << codes[k] << "\n";
    if (codes[k] == kExitNoConvergence) worst = kExitNoConvergence;
    else if (codes[k] == kExitMarginViolated && worst == kExitOk)
      worst = kExitMarginViolated;
    else if (codes[k] == kExitError && worst == kExitOk) worst = kExitError;
  }
  return worst;
}

int run_subcommand(const std::string& cmd, const RunConfig& cfg) {
  if (cmd == "farfield") return run_farfield(cfg);
  if (cmd == "solve") return run_solve(cfg);
  if (cmd == "diagnose") return run_diagnose(cfg);
  if (cmd == "critical") return run_critical(cfg);
  if (cmd == "sweep") return run_sweep(cfg);
  std::cerr << "unknown subcommand " << cmd << "\n";
  return kExitError;
}

}  // namespace nozzleflow
