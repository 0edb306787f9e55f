#pragma once

#include <functional>

namespace nozzleflow {

// Root of f on [lo, hi] where f(lo) and f(hi) have opposite (or zero) signs.
// Bisection with secant acceleration; always terminates with a bracketed root.
// Stops when the bracket shrinks below xtol or |f| falls below ftol.
double find_root_bracketed(const std::function<double(double)>& f, double lo,
                           double hi, double xtol, double ftol = 0.0,
                           int max_iter = 200);

// Newton iteration safeguarded by a shrinking bracket [lo, hi]. Falls back to
// bisection whenever a Newton step leaves the bracket. f must be monotone
// enough that f(lo) and f(hi) straddle zero.
double find_root_newton(const std::function<double(double)>& f,
                        const std::function<double(double)>& df, double x0,
                        double lo, double hi, double xtol, int max_iter = 100);

}  // namespace nozzleflow
