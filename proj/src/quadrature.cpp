#include "berwald/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "berwald/errors.hpp"

namespace berwald {

namespace {

constexpr unsigned kMaxDepth = 15;
constexpr double kCurlStepRel = 1e-4;

double richardson(const std::function<double(double)>& f, double x) {
  const double h = kCurlStepRel * std::max(1.0, std::fabs(x));
  auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b) {
  if (a == b) return 0.0;
  // Shifted by one so the relative tolerance has an absolute floor.
  const double lo = std::min(a, b), hi = std::max(a, b);
  double error = 0.0;
  const double shifted = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      [&](double s) { return f(s) + 1.0; }, lo, hi, kMaxDepth, kQuadratureRelTol, &error);
  const double value = shifted - (hi - lo);
  if (!std::isfinite(value)) throw DomainError("integrand is not finite on the interval");
  return b < a ? -value : value;
}

LineIntegral::LineIntegral(Scalar2 P, Scalar2 Q, double t0, double r0, Scalar2 curl)
    : P_(std::move(P)), Q_(std::move(Q)), curl_(std::move(curl)), t0_(t0), r0_(r0) {}

LineIntegral LineIntegral::from_exprs(const Expr& P, const Expr& Q, double t0, double r0) {
  const Expr curl = diff(P, 1) - diff(Q, 0);
  return LineIntegral([P](double t, double r) { return P.eval(t, r); },
                      [Q](double t, double r) { return Q.eval(t, r); }, t0, r0,
                      [curl](double t, double r) { return curl.eval(t, r); });
}

double LineIntegral::operator()(double t, double r) const {
  const double leg_t = integrate([&](double s) { return P_(s, r0_); }, t0_, t);
  const double leg_r = integrate([&](double s) { return Q_(t, s); }, r0_, r);
  return leg_t + leg_r;
}

double LineIntegral::curl(double t, double r) const {
  if (curl_) return curl_(t, r);
  return richardson([&](double s) { return P_(t, s); }, r) -
         richardson([&](double s) { return Q_(s, r); }, t);
}

double LineIntegral::max_curl(const std::vector<GridPoint>& pts) const {
  double worst = 0.0;
  for (const auto& p : pts) worst = std::max(worst, std::fabs(curl(p.t, p.r)));
  return worst;
}

double LineIntegral::require_closed(const std::vector<GridPoint>& pts, double tol) const {
  double worst = 0.0;
  for (const auto& p : pts) {
    const double c = std::fabs(curl(p.t, p.r));
    if (!(c <= tol)) {
      std::ostringstream msg;
      msg << "integrand is not closed: curl " << c << " at (t, r) = (" << p.t << ", " << p.r
          << ")";
      throw ConstructionError(msg.str());
    }
    worst = std::max(worst, c);
  }
  return worst;
}

}  // namespace berwald
