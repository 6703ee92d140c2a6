#pragma once

// Adaptive Gauss-Kronrod quadrature and path integrals of closed 1-forms
// P dt + Q dr on the (t, r) plane.

#include <functional>
#include <vector>

#include "berwald/classifier.hpp"
#include "berwald/expr.hpp"

namespace berwald {

using Scalar2 = std::function<double(double, double)>;

inline constexpr double kQuadratureRelTol = 1e-11;

// Integral of f over [a, b]; b < a gives the negated integral.
double integrate(const std::function<double(double)>& f, double a, double b);

class LineIntegral {
 public:
  // `curl` returns d_r P - d_t Q; when absent it is taken by finite differences.
  LineIntegral(Scalar2 P, Scalar2 Q, double t0, double r0, Scalar2 curl = {});
  // Expressions in (t, r); the curl is differentiated symbolically.
  static LineIntegral from_exprs(const Expr& P, const Expr& Q, double t0, double r0);

  // Integral along (t0, r0) -> (t, r0) -> (t, r).
  double operator()(double t, double r) const;
  double P(double t, double r) const { return P_(t, r); }
  double Q(double t, double r) const { return Q_(t, r); }
  double curl(double t, double r) const;
  double max_curl(const std::vector<GridPoint>& pts) const;
  // Throws ConstructionError when the curl exceeds tol anywhere on pts.
  double require_closed(const std::vector<GridPoint>& pts, double tol) const;

  double t0() const { return t0_; }
  double r0() const { return r0_; }

 private:
  Scalar2 P_, Q_, curl_;
  double t0_, r0_;
};

}  // namespace berwald
