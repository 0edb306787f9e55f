#include "nozzleflow/run_config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "nozzleflow/csv_io.hpp"

namespace nozzleflow {

namespace {

using json = nlohmann::json;

struct Collector {
  std::vector<std::string> errors;
  void add(const std::string& e) { errors.push_back(e); }
  void require(bool ok, const std::string& e) {
    if (!ok) add(e);
  }
};

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& allowed, Collector& err) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      err.add(where + ": unknown key '" + it.key() + "'");
}

double num_or(const json& j, const std::string& key, double fallback,
              const std::string& where, Collector& err) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    err.add(where + "." + key + " must be a number");
    return fallback;
  }
  return j[key].get<double>();
}

int int_or(const json& j, const std::string& key, int fallback,
           const std::string& where, Collector& err) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) {
    err.add(where + "." + key + " must be an integer");
    return fallback;
  }
  return j[key].get<int>();
}

Profile1D parse_profile(const json& j, const std::string& where, Collector& err) {
  const Profile1D fallback = Profile1D::constant(1.0);
  if (!j.is_object() || !j.contains("type")) {
    err.add(where + " must be an object with a 'type'");
    return fallback;
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "constant") {
    check_keys(j, where, {"type", "value"}, err);
    const double v = num_or(j, "value", 1.0, where, err);
    if (!(v > 0.0)) {
      err.add(where + ".value must be positive");
      return fallback;
    }
    return Profile1D::constant(v);
  }
  if (type == "poly") {
    check_keys(j, where, {"type", "coeffs"}, err);
    if (!j.contains("coeffs") || !j["coeffs"].is_array() || j["coeffs"].empty()) {
      err.add(where + ".coeffs must be a nonempty array");
      return fallback;
    }
    Eigen::VectorXd c(j["coeffs"].size());
    for (size_t k = 0; k < j["coeffs"].size(); ++k) c(k) = j["coeffs"][k].get<double>();
    return Profile1D::polynomial(c);
  }
  if (type == "sine") {
    check_keys(j, where, {"type", "base", "amp", "k"}, err);
    return Profile1D::sine(num_or(j, "base", 1.0, where, err),
                           num_or(j, "amp", 0.0, where, err),
                           num_or(j, "k", 1.0, where, err));
  }
  if (type == "tabulated") {
    check_keys(j, where, {"type", "path"}, err);
    if (!j.contains("path")) {
      err.add(where + ".path missing for tabulated profile");
      return fallback;
    }
    try {
      const CsvTable t = read_csv(j["path"].get<std::string>());
      Eigen::VectorXd x(t.rows.size()), y(t.rows.size());
      for (size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r].size() < 2)
          throw std::runtime_error("need two columns (x2, value)");
        x(r) = t.rows[r][0];
        y(r) = t.rows[r][1];
      }
      return Profile1D::tabulated(x, y);
    } catch (const std::exception& e) {
      err.add(where + ": " + e.what());
      return fallback;
    }
  }
  err.add(where + ".type '" + type + "' is not one of constant|poly|sine|tabulated");
  return fallback;
}

NozzleWalls parse_walls(const json& j, Collector& err) {
  if (!j.is_object() || !j.contains("family")) {
    err.add("walls must be an object with a 'family'");
    return NozzleWalls::straight();
  }
  const std::string family = j["family"].get<std::string>();
  if (family == "straight") {
    check_keys(j, "walls", {"family"}, err);
    return NozzleWalls::straight();
  }
  if (family == "tanh") {
    check_keys(j, "walls", {"family", "a", "b", "ell"}, err);
    const double a = num_or(j, "a", 0.0, "walls", err);
    const double b = num_or(j, "b", 1.0, "walls", err);
    const double ell = num_or(j, "ell", 1.0, "walls", err);
    if (!(b > a)) {
      err.add("walls: exit requires b > a");
      return NozzleWalls::straight();
    }
    if (!(ell > 0.0)) {
      err.add("walls.ell must be positive");
      return NozzleWalls::straight();
    }
    return NozzleWalls::tanh_family(a, b, ell);
  }
  if (family == "tabulated") {
    check_keys(j, "walls", {"family", "path"}, err);
    if (!j.contains("path")) {
      err.add("walls.path missing for tabulated walls");
      return NozzleWalls::straight();
    }
    try {
      const CsvTable t = read_csv(j["path"].get<std::string>());
      Eigen::VectorXd x(t.rows.size()), f1(t.rows.size()), f2(t.rows.size());
      for (size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r].size() < 3)
          throw std::runtime_error("need three columns (x1, f1, f2)");
        x(r) = t.rows[r][0];
        f1(r) = t.rows[r][1];
        f2(r) = t.rows[r][2];
      }
      return NozzleWalls::tabulated(x, f1, f2);
    } catch (const std::exception& e) {
      err.add(std::string("walls: ") + e.what());
      return NozzleWalls::straight();
    }
  }
  err.add("walls.family '" + family + "' is not one of straight|tanh|tabulated");
  return NozzleWalls::straight();
}

RunConfig parse_config_impl(const json& j) {
  Collector err;
  RunConfig cfg;

  check_keys(j, "config",
             {"gas", "walls", "profiles", "m", "m_list", "sweep", "grid", "solver",
              "width", "output_dir", "threads"},
             err);

  if (j.contains("gas")) {
    check_keys(j["gas"], "gas", {"gamma"}, err);
    cfg.gamma = num_or(j["gas"], "gamma", 2.0, "gas", err);
  }
  err.require(cfg.gamma > 1.0, "gas.gamma must exceed 1");

  if (j.contains("walls")) cfg.walls = parse_walls(j["walls"], err);
  else err.add("walls section is required");

  if (j.contains("profiles")) {
    check_keys(j["profiles"], "profiles", {"S", "B"}, err);
    if (j["profiles"].contains("S"))
      cfg.profiles.S = parse_profile(j["profiles"]["S"], "profiles.S", err);
    if (j["profiles"].contains("B"))
      cfg.profiles.B = parse_profile(j["profiles"]["B"], "profiles.B", err);
  } else {
    err.add("profiles section is required");
  }

  int targets = 0;
  if (j.contains("m")) {
    ++targets;
    if (!j["m"].is_number()) err.add("m must be a number");
    else {
      cfg.m = j["m"].get<double>();
      err.require(*cfg.m > 0.0, "m must be positive");
    }
  }
  if (j.contains("m_list")) {
    ++targets;
    if (!j["m_list"].is_array() || j["m_list"].empty())
      err.add("m_list must be a nonempty array");
    else
      for (const auto& v : j["m_list"]) {
        cfg.m_list.push_back(v.get<double>());
        err.require(cfg.m_list.back() > 0.0, "m_list entries must be positive");
      }
  }
  if (j.contains("sweep")) {
    ++targets;
    check_keys(j["sweep"], "sweep", {"m_seed", "tol_m"}, err);
    SweepSpec s;
    s.m_seed = num_or(j["sweep"], "m_seed", 0.0, "sweep", err);
    s.tol_m = num_or(j["sweep"], "tol_m", 0.0, "sweep", err);
    err.require(s.m_seed > 0.0, "sweep.m_seed must be positive");
    err.require(s.tol_m > 0.0, "sweep.tol_m must be positive");
    cfg.sweep = s;
  }
  err.require(targets >= 1, "one of m, m_list, sweep is required");

  if (j.contains("grid")) {
    check_keys(j["grid"], "grid", {"L", "nx", "ny"}, err);
    cfg.grid.L = num_or(j["grid"], "L", 0.0, "grid", err);
    cfg.grid.nx = int_or(j["grid"], "nx", 201, "grid", err);
    cfg.grid.ny = int_or(j["grid"], "ny", 51, "grid", err);
    err.require(cfg.grid.nx >= 3 && cfg.grid.ny >= 3, "grid.nx and grid.ny must be at least 3");
  }

  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, "solver",
               {"epsilon", "tol_update", "tol_residual", "max_picard", "relaxation",
                "linear_tol", "linear_max_iter", "face_bc"},
               err);
    cfg.solver.epsilon = num_or(s, "epsilon", 0.0, "solver", err);
    cfg.solver.tol_update = num_or(s, "tol_update", 1e-9, "solver", err);
    cfg.solver.tol_residual = num_or(s, "tol_residual", 0.0, "solver", err);
    cfg.solver.max_picard = int_or(s, "max_picard", 200, "solver", err);
    cfg.solver.relaxation = num_or(s, "relaxation", 0.7, "solver", err);
    cfg.solver.linear_tol = num_or(s, "linear_tol", 1e-12, "solver", err);
    cfg.solver.linear_max_iter = int_or(s, "linear_max_iter", 50000, "solver", err);
    if (s.contains("face_bc")) {
      const std::string mode = s["face_bc"].get<std::string>();
      if (mode == "farfield") cfg.solver.face_bc = FaceBcMode::farfield;
      else if (mode == "wallformula") cfg.solver.face_bc = FaceBcMode::wallformula;
      else err.add("solver.face_bc must be farfield or wallformula");
    }
    err.require(cfg.solver.tol_update > 0.0, "solver.tol_update must be positive");
    err.require(cfg.solver.linear_tol > 0.0, "solver.linear_tol must be positive");
    err.require(cfg.solver.relaxation > 0.0 && cfg.solver.relaxation <= 1.0,
                "solver.relaxation must lie in (0, 1]");
    err.require(cfg.solver.max_picard >= 1, "solver.max_picard must be positive");
    err.require(cfg.solver.linear_max_iter >= 1, "solver.linear_max_iter must be positive");
  }

  cfg.width = num_or(j, "width", 0.0, "config", err);
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  cfg.threads = int_or(j, "threads", 0, "config", err);

  if (!err.errors.empty()) throw config_error(std::move(err.errors));
  return cfg;
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw config_error({std::string("not valid JSON: ") + e.what()});
  }
  return parse_config_impl(j);
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error({"cannot open config file " + path});
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

}  // namespace nozzleflow
