#include "nozzleflow/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace nozzleflow {

NozzleWalls NozzleWalls::straight() {
  NozzleWalls w;
  w.family_ = Family::Straight;
  w.a_ = 0.0;
  w.b_ = 1.0;
  return w;
}

NozzleWalls NozzleWalls::tanh_family(double a, double b, double ell) {
  if (!(b > a)) throw std::domain_error("NozzleWalls: exit width requires b > a");
  if (!(ell > 0.0)) throw std::domain_error("NozzleWalls: transition length must be positive");
  NozzleWalls w;
  w.family_ = Family::Tanh;
  w.a_ = a;
  w.b_ = b;
  w.ell_ = ell;
  // The blend is monotone between the asymptote pairs; the gap stays positive
  // because both walls share the same blend function.
  return w;
}

NozzleWalls NozzleWalls::tabulated(Eigen::VectorXd x1, Eigen::VectorXd f1,
                                   Eigen::VectorXd f2) {
  NozzleWalls w;
  w.family_ = Family::Tabulated;
  w.tab_span_ = x1(x1.size() - 1) - x1(0);
  w.a_ = f1(f1.size() - 1);
  w.b_ = f2(f2.size() - 1);
  w.tab1_ = std::make_shared<CubicSpline>(x1, std::move(f1));
  w.tab2_ = std::make_shared<CubicSpline>(std::move(x1), std::move(f2));
  if (!(w.b_ > w.a_)) throw std::domain_error("NozzleWalls: exit width requires b > a");
  return w;
}

NozzleWalls::WallPoint NozzleWalls::eval(int which, double x1) const {
  if (which != 1 && which != 2) throw std::invalid_argument("NozzleWalls: wall index must be 1 or 2");
  switch (family_) {
    case Family::Straight:
      return {which == 1 ? 0.0 : 1.0, 0.0, 0.0};
    case Family::Tanh: {
      const double lo = (which == 1) ? 0.0 : 1.0;
      const double hi = (which == 1) ? a_ : b_;
      const double t = x1 / ell_;
      const double th = std::tanh(t);
      const double sech2 = 1.0 - th * th;
      const double sigma = 0.5 * (1.0 + th);
      return {lo + (hi - lo) * sigma, (hi - lo) * 0.5 * sech2 / ell_,
              (hi - lo) * (-th * sech2) / (ell_ * ell_)};
    }
    case Family::Tabulated: {
      const CubicSpline& s = (which == 1) ? *tab1_ : *tab2_;
      return {s.value(x1), s.deriv(x1), s.deriv2(x1)};
    }
  }
  throw std::logic_error("NozzleWalls: unknown family");
}

double NozzleWalls::suggested_half_length() const {
  switch (family_) {
    case Family::Straight:
      return 10.0;
    case Family::Tanh:
      return 10.0 * ell_ + 5.0;
    case Family::Tabulated:
      return 0.5 * tab_span_;
  }
  return 10.0;
}

FlattenedPoint flatten(const NozzleWalls& walls, double x1, double x2) {
  const double f1 = walls.lower(x1);
  const double f2 = walls.upper(x1);
  if (x2 < f1 || x2 > f2)
    throw std::domain_error("flatten: point lies outside the nozzle walls");
  return {x1, (x2 - f1) / (f2 - f1)};
}

double unflatten_x2(const NozzleWalls& walls, double t1, double t2) {
  const double f1 = walls.lower(t1);
  return f1 + t2 * (walls.upper(t1) - f1);
}

Eigen::Vector2d gradient_to_physical(const NozzleWalls& walls, double t1,
                                     double t2, double dpsi_dt1, double dpsi_dt2) {
  const auto w1 = walls.eval(1, t1);
  const auto w2 = walls.eval(2, t1);
  const double H = w2.f - w1.f;
  const double dt2dx1 = -(w1.d1 + t2 * (w2.d1 - w1.d1)) / H;
  return {dpsi_dt1 + dpsi_dt2 * dt2dx1, dpsi_dt2 / H};
}

FlattenedDomain FlattenedDomain::truncate(const NozzleWalls& walls, double L,
                                          int nx, int ny) {
  if (!(L > 0.0)) throw std::domain_error("truncate: L must be positive");
  if (nx < 3 || ny < 3) throw std::domain_error("truncate: need at least a 3x3 grid");
  FlattenedDomain d;
  d.L = L;
  d.nx = nx;
  d.ny = ny;
  d.h1 = 2.0 * L / (nx - 1);
  d.h2 = 1.0 / (ny - 1);
  d.t1 = Eigen::VectorXd::LinSpaced(nx, -L, L);
  d.t2 = Eigen::VectorXd::LinSpaced(ny, 0.0, 1.0);
  d.walls = walls;

  auto fill = [&](const Eigen::VectorXd& xs, Eigen::VectorXd& f1v, Eigen::VectorXd& f2v,
                  Eigen::VectorXd& f1p, Eigen::VectorXd& f2p, Eigen::VectorXd& H) {
    const int n = static_cast<int>(xs.size());
    f1v.resize(n);
    f2v.resize(n);
    f1p.resize(n);
    f2p.resize(n);
    H.resize(n);
    for (int i = 0; i < n; ++i) {
      const auto w1 = walls.eval(1, xs(i));
      const auto w2 = walls.eval(2, xs(i));
      f1v(i) = w1.f;
      f2v(i) = w2.f;
      f1p(i) = w1.d1;
      f2p(i) = w2.d1;
      H(i) = w2.f - w1.f;
      if (!(H(i) > 0.0))
        throw std::domain_error("truncate: wall gap not positive at x1 = " +
                                std::to_string(xs(i)));
    }
  };
  fill(d.t1, d.f1_node, d.f2_node, d.f1p_node, d.f2p_node, d.H_node);
  Eigen::VectorXd mid = 0.5 * (d.t1.head(nx - 1) + d.t1.tail(nx - 1));
  fill(mid, d.f1_mid, d.f2_mid, d.f1p_mid, d.f2p_mid, d.H_mid);
  return d;
}

}  // namespace nozzleflow
