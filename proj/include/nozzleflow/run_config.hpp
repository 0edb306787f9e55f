#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nozzleflow/critical.hpp"

namespace nozzleflow {

class config_error : public std::runtime_error {
 public:
  explicit config_error(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& e : v) s += "\n  - " + e;
    return s;
  }
  std::vector<std::string> violations_;
};

struct GridSpec {
  double L = 0.0;  // <= 0 selects the wall family's suggested half-length
  int nx = 201;
  int ny = 51;
};

struct SweepSpec {
  double m_seed = 0.0;
  double tol_m = 0.0;
};

struct RunConfig {
  double gamma = 2.0;
  NozzleWalls walls;
  Profiles profiles{Profile1D::constant(1.0), Profile1D::constant(1.0)};
  std::optional<double> m;
  std::vector<double> m_list;
  std::optional<SweepSpec> sweep;
  GridSpec grid;
  SolverConfig solver;
  double width = 0.0;  // <= 0 selects the wall exit width
  std::string output_dir = "out";
  int threads = 0;  // <= 0 defers to NOZZLEFLOW_THREADS, then hardware

  GasModel gas() const { return GasModel(gamma); }
  double half_length() const {
    return grid.L > 0.0 ? grid.L : walls.suggested_half_length();
  }
  double effective_width() const {
    return width > 0.0 ? width : walls.exit_width();
  }
};

// Parse and validate; reports every violation, not just the first, and
// rejects unknown keys.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& json_text);

}  // namespace nozzleflow
