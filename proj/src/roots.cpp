#include "nozzleflow/roots.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nozzleflow {

double find_root_bracketed(const std::function<double(double)>& f, double lo,
                           double hi, double xtol, double ftol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (std::isnan(flo) || std::isnan(fhi))
    throw std::runtime_error("find_root_bracketed: NaN at bracket endpoint");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0)
    throw std::runtime_error("find_root_bracketed: endpoints do not bracket a root, f(" +
                             std::to_string(lo) + ")=" + std::to_string(flo) + ", f(" +
                             std::to_string(hi) + ")=" + std::to_string(fhi));

  double x = lo;
  for (int it = 0; it < max_iter; ++it) {
    // Secant proposal from the current bracket, clipped to its interior.
    double xs = hi - fhi * (hi - lo) / (fhi - flo);
    double mid = 0.5 * (lo + hi);
    if (!(xs > lo && xs < hi)) xs = mid;
    // Alternate with bisection so the bracket provably shrinks.
    x = (it % 2 == 0) ? xs : mid;
    double fx = f(x);
    if (fx == 0.0 || std::abs(fx) <= ftol) return x;
    if (flo * fx < 0.0) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
    if (hi - lo <= xtol) return 0.5 * (lo + hi);
  }
  return 0.5 * (lo + hi);
}

double find_root_newton(const std::function<double(double)>& f,
                        const std::function<double(double)>& df, double x0,
                        double lo, double hi, double xtol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0)
    throw std::runtime_error("find_root_newton: endpoints do not bracket a root");

  double x = std::min(std::max(x0, lo), hi);
  double fx = f(x);
  for (int it = 0; it < max_iter; ++it) {
    if (fx == 0.0) return x;
    // Maintain the bracket.
    if (flo * fx < 0.0) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
    if (hi - lo <= xtol) return 0.5 * (lo + hi);
    double d = df(x);
    double xn = (d != 0.0) ? x - fx / d : lo - 1.0;  // force bisection on flat slope
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) <= xtol) return xn;
    x = xn;
    fx = f(x);
  }
  return x;
}

}  // namespace nozzleflow
