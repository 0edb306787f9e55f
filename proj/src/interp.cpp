#include "nozzleflow/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nozzleflow {

namespace {

void check_table(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("interp: need at least two matching samples");
  for (int i = 0; i + 1 < x.size(); ++i)
    if (!(x(i + 1) > x(i)))
      throw std::invalid_argument("interp: abscissae must be strictly increasing");
}

int find_segment(const Eigen::VectorXd& x, double q) {
  int lo = 0, hi = static_cast<int>(x.size()) - 1;
  if (q <= x(0)) return 0;
  if (q >= x(hi)) return hi - 1;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    (q < x(mid) ? hi : lo) = mid;
  }
  return lo;
}

}  // namespace

PchipInterpolant::PchipInterpolant(Eigen::VectorXd x, Eigen::VectorXd y)
    : x_(std::move(x)), y_(std::move(y)) {
  check_table(x_, y_);
  const int n = static_cast<int>(x_.size());
  Eigen::VectorXd h(n - 1), slope(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    h(i) = x_(i + 1) - x_(i);
    slope(i) = (y_(i + 1) - y_(i)) / h(i);
  }
  d_.resize(n);
  // Fritsch-Carlson: harmonic-mean interior slopes, zeroed across extrema.
  for (int i = 1; i < n - 1; ++i) {
    if (slope(i - 1) * slope(i) <= 0.0) {
      d_(i) = 0.0;
    } else {
      const double w1 = 2.0 * h(i) + h(i - 1);
      const double w2 = h(i) + 2.0 * h(i - 1);
      d_(i) = (w1 + w2) / (w1 / slope(i - 1) + w2 / slope(i));
    }
  }
  // One-sided endpoint slopes, limited to preserve monotonicity.
  auto end_slope = [](double h0, double h1, double s0, double s1) {
    double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if (d * s0 <= 0.0) d = 0.0;
    else if (s0 * s1 <= 0.0 && std::abs(d) > 3.0 * std::abs(s0)) d = 3.0 * s0;
    return d;
  };
  if (n == 2) {
    d_(0) = d_(1) = slope(0);
  } else {
    d_(0) = end_slope(h(0), h(1), slope(0), slope(1));
    d_(n - 1) = end_slope(h(n - 2), h(n - 3), slope(n - 2), slope(n - 3));
  }
}

int PchipInterpolant::segment(double q) const { return find_segment(x_, q); }

double PchipInterpolant::value(double q) const {
  if (q <= x_(0)) return y_(0);
  if (q >= x_(x_.size() - 1)) return y_(y_.size() - 1);
  const int i = segment(q);
  const double h = x_(i + 1) - x_(i);
  const double t = (q - x_(i)) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  return h00 * y_(i) + h10 * h * d_(i) + h01 * y_(i + 1) + h11 * h * d_(i + 1);
}

double PchipInterpolant::deriv(double q) const {
  if (q < x_(0) || q > x_(x_.size() - 1)) return 0.0;
  const int i = segment(q);
  const double h = x_(i + 1) - x_(i);
  const double t = (q - x_(i)) / h;
  const double dh00 = 6 * t * (t - 1) / h;
  const double dh10 = (3 * t * t - 4 * t + 1);
  const double dh01 = -6 * t * (t - 1) / h;
  const double dh11 = (3 * t * t - 2 * t);
  return dh00 * y_(i) + dh10 * d_(i) + dh01 * y_(i + 1) + dh11 * d_(i + 1);
}

HermiteInterpolant::HermiteInterpolant(Eigen::VectorXd x, Eigen::VectorXd y,
                                       Eigen::VectorXd d)
    : x_(std::move(x)), y_(std::move(y)), d_(std::move(d)) {
  check_table(x_, y_);
  if (d_.size() != x_.size())
    throw std::invalid_argument("interp: slope table size mismatch");
}

int HermiteInterpolant::segment(double q) const { return find_segment(x_, q); }

double HermiteInterpolant::value(double q) const {
  const int n = static_cast<int>(x_.size());
  if (q <= x_(0)) return y_(0) + d_(0) * (q - x_(0));
  if (q >= x_(n - 1)) return y_(n - 1) + d_(n - 1) * (q - x_(n - 1));
  const int i = segment(q);
  const double h = x_(i + 1) - x_(i);
  const double t = (q - x_(i)) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  return h00 * y_(i) + h10 * h * d_(i) + h01 * y_(i + 1) + h11 * h * d_(i + 1);
}

double HermiteInterpolant::deriv(double q) const {
  const int n = static_cast<int>(x_.size());
  if (q <= x_(0)) return d_(0);
  if (q >= x_(n - 1)) return d_(n - 1);
  const int i = segment(q);
  const double h = x_(i + 1) - x_(i);
  const double t = (q - x_(i)) / h;
  const double dh00 = 6 * t * (t - 1) / h;
  const double dh10 = (3 * t * t - 4 * t + 1);
  const double dh01 = -6 * t * (t - 1) / h;
  const double dh11 = (3 * t * t - 2 * t);
  return dh00 * y_(i) + dh10 * d_(i) + dh01 * y_(i + 1) + dh11 * d_(i + 1);
}

double HermiteInterpolant::inverse(double yq) const {
  const int n = static_cast<int>(x_.size());
  if (yq <= y_(0)) return x_(0);
  if (yq >= y_(n - 1)) return x_(n - 1);
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    (yq < y_(mid) ? hi : lo) = mid;
  }
  // Newton within the bracketing segment, bisection fallback.
  double a = x_(lo), b = x_(lo + 1);
  double q = a + (b - a) * (yq - y_(lo)) / (y_(lo + 1) - y_(lo));
  for (int it = 0; it < 60; ++it) {
    const double f = value(q) - yq;
    if (f > 0.0) b = q;
    else if (f < 0.0) a = q;
    else return q;
    const double df = deriv(q);
    double qn = (df > 0.0) ? q - f / df : 0.5 * (a + b);
    if (!(qn > a && qn < b)) qn = 0.5 * (a + b);
    if (std::abs(qn - q) < 1e-15 * (1.0 + std::abs(q))) return qn;
    q = qn;
  }
  return q;
}

CubicSpline::CubicSpline(Eigen::VectorXd x, Eigen::VectorXd y)
    : x_(std::move(x)), y_(std::move(y)) {
  check_table(x_, y_);
  const int n = static_cast<int>(x_.size());
  m_ = Eigen::VectorXd::Zero(n);
  if (n > 2) {
    // Tridiagonal solve for natural-end second derivatives (Thomas algorithm).
    Eigen::VectorXd diag(n - 2), rhs(n - 2), sub(n - 2), sup(n - 2);
    for (int i = 1; i < n - 1; ++i) {
      const double h0 = x_(i) - x_(i - 1);
      const double h1 = x_(i + 1) - x_(i);
      sub(i - 1) = h0 / 6.0;
      diag(i - 1) = (h0 + h1) / 3.0;
      sup(i - 1) = h1 / 6.0;
      rhs(i - 1) = (y_(i + 1) - y_(i)) / h1 - (y_(i) - y_(i - 1)) / h0;
    }
    for (int i = 1; i < n - 2; ++i) {
      const double w = sub(i) / diag(i - 1);
      diag(i) -= w * sup(i - 1);
      rhs(i) -= w * rhs(i - 1);
    }
    Eigen::VectorXd sol(n - 2);
    sol(n - 3) = rhs(n - 3) / diag(n - 3);
    for (int i = n - 4; i >= 0; --i)
      sol(i) = (rhs(i) - sup(i) * sol(i + 1)) / diag(i);
    m_.segment(1, n - 2) = sol;
  }
}

int CubicSpline::segment(double q) const { return find_segment(x_, q); }

double CubicSpline::value(double q) const {
  const int n = static_cast<int>(x_.size());
  if (q <= x_(0)) return y_(0);
  if (q >= x_(n - 1)) return y_(n - 1);
  const int i = segment(q);
  const double h = x_(i + 1) - x_(i);
  const double A = (x_(i + 1) - q) / h;
  const double B = (q - x_(i)) / h;
  return A * y_(i) + B * y_(i + 1) +
         ((A * A * A - A) * m_(i) + (B * B * B - B) * m_(i + 1)) * h * h / 6.0;
}

double CubicSpline::deriv(double q) const {
  const int n = static_cast<int>(x_.size());
  if (q <= x_(0) || q >= x_(n - 1)) return 0.0;
  const int i = segment(q);
  const double h = x_(i + 1) - x_(i);
  const double A = (x_(i + 1) - q) / h;
  const double B = (q - x_(i)) / h;
  return (y_(i + 1) - y_(i)) / h +
         ((1.0 - 3.0 * A * A) * m_(i) + (3.0 * B * B - 1.0) * m_(i + 1)) * h / 6.0;
}

double CubicSpline::deriv2(double q) const {
  const int n = static_cast<int>(x_.size());
  if (q <= x_(0) || q >= x_(n - 1)) return 0.0;
  const int i = segment(q);
  const double h = x_(i + 1) - x_(i);
  const double A = (x_(i + 1) - q) / h;
  const double B = (q - x_(i)) / h;
  return A * m_(i) + B * m_(i + 1);
}

}  // namespace nozzleflow
