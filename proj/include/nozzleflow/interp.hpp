#pragma once

#include <Eigen/Core>

namespace nozzleflow {

// Monotone C1 cubic interpolant (Fritsch-Carlson slope limiting). Preserves
// monotonicity of the data and never overshoots. Constant extrapolation
// outside the abscissa range.
class PchipInterpolant {
 public:
  PchipInterpolant() = default;
  PchipInterpolant(Eigen::VectorXd x, Eigen::VectorXd y);

  double value(double q) const;
  double deriv(double q) const;
  double x_min() const { return x_(0); }
  double x_max() const { return x_(x_.size() - 1); }

 private:
  int segment(double q) const;
  Eigen::VectorXd x_, y_, d_;  // d_: limited node slopes
};

// C1 cubic Hermite interpolant with caller-supplied node slopes.
// Linear extrapolation outside the abscissa range.
class HermiteInterpolant {
 public:
  HermiteInterpolant() = default;
  HermiteInterpolant(Eigen::VectorXd x, Eigen::VectorXd y, Eigen::VectorXd d);

  double value(double q) const;
  double deriv(double q) const;

  // Inverse evaluation for strictly increasing data.
  double inverse(double yq) const;

 private:
  int segment(double q) const;
  Eigen::VectorXd x_, y_, d_;
};

// Natural C2 cubic spline; constant-value extrapolation beyond the table.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(Eigen::VectorXd x, Eigen::VectorXd y);

  double value(double q) const;
  double deriv(double q) const;
  double deriv2(double q) const;

 private:
  int segment(double q) const;
  Eigen::VectorXd x_, y_, m_;  // m_: second derivatives at nodes
};

}  // namespace nozzleflow
