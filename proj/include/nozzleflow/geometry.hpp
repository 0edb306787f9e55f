#pragma once

#include <memory>

#include <Eigen/Core>

#include "nozzleflow/interp.hpp"

namespace nozzleflow {

// Nozzle wall pair f1 < f2 with C2 evaluation. Upstream asymptotes are fixed
// at (0, 1); downstream asymptotes are (a, b).
class NozzleWalls {
 public:
  struct WallPoint {
    double f;
    double d1;
    double d2;
  };

  static NozzleWalls straight();  // f1 = 0, f2 = 1 everywhere
  // f_i = c_i^- + (c_i^+ - c_i^-) * (1 + tanh(x1/ell)) / 2
  static NozzleWalls tanh_family(double a, double b, double ell);
  static NozzleWalls tabulated(Eigen::VectorXd x1, Eigen::VectorXd f1,
                               Eigen::VectorXd f2);

  WallPoint eval(int which, double x1) const;  // which in {1, 2}
  double lower(double x1) const { return eval(1, x1).f; }
  double upper(double x1) const { return eval(2, x1).f; }
  double gap(double x1) const { return upper(x1) - lower(x1); }

  double exit_lower() const { return a_; }
  double exit_upper() const { return b_; }
  double exit_width() const { return b_ - a_; }
  // Truncation half-length at which the walls are flat to rounding for the
  // built-in families.
  double suggested_half_length() const;

  NozzleWalls() = default;  // a straight channel until replaced

 private:
  enum class Family { Straight, Tanh, Tabulated } family_ = Family::Straight;
  double a_ = 0.0, b_ = 1.0, ell_ = 1.0;
  std::shared_ptr<const CubicSpline> tab1_, tab2_;
  double tab_span_ = 0.0;
};

struct FlattenedPoint {
  double t1;
  double t2;
};

// (x1, x2) -> (t1, t2) with t2 = (x2 - f1)/(f2 - f1); throws if x2 lies
// outside the walls.
FlattenedPoint flatten(const NozzleWalls& walls, double x1, double x2);
double unflatten_x2(const NozzleWalls& walls, double t1, double t2);

// Chain rule from flattened-coordinate derivatives to physical ones:
//   psi_x2 = psi_t2 / (f2 - f1)
//   psi_x1 = psi_t1 + psi_t2 * dt2/dx1
// with dt2/dx1 = -(f1' + t2 (f2' - f1')) / (f2 - f1).
Eigen::Vector2d gradient_to_physical(const NozzleWalls& walls, double t1,
                                     double t2, double dpsi_dt1,
                                     double dpsi_dt2);

// Uniform tensor grid on [-L, L] x [0, 1] with per-column wall metrics cached
// at the nodes and at the column midpoints.
struct FlattenedDomain {
  double L = 0.0;
  int nx = 0, ny = 0;
  double h1 = 0.0, h2 = 0.0;
  Eigen::VectorXd t1, t2;
  // node columns
  Eigen::VectorXd f1_node, f2_node, f1p_node, f2p_node, H_node;
  // midpoint columns (between adjacent nodes)
  Eigen::VectorXd f1_mid, f2_mid, f1p_mid, f2p_mid, H_mid;
  NozzleWalls walls;

  static FlattenedDomain truncate(const NozzleWalls& walls, double L, int nx, int ny);

  double dt2dx1_node(int i, double t2v) const {
    return -(f1p_node(i) + t2v * (f2p_node(i) - f1p_node(i))) / H_node(i);
  }
  double dt2dx1_mid(int i, double t2v) const {
    return -(f1p_mid(i) + t2v * (f2p_mid(i) - f1p_mid(i))) / H_mid(i);
  }
  double x2_node(int i, int j) const { return f1_node(i) + t2(j) * H_node(i); }
  int num_nodes() const { return nx * ny; }
};

}  // namespace nozzleflow
