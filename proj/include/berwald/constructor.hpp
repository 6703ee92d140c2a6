#pragma once

// Builders of Berwald pseudo-Finsler functions for each constructible
// classification label, plus the diagnostics they rely on.

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "berwald/classifier.hpp"
#include "berwald/connection.hpp"
#include "berwald/finsler.hpp"

namespace berwald {

inline constexpr double kConstancyTol = 1e-8;
inline constexpr double kCurlTol = 1e-8;
inline constexpr double kTransportTol = 1e-10;
inline constexpr double kPathSwapTol = 1e-7;
// One-variable class cone: minimum relative size of the slope integrand's
// denominator.
inline constexpr double kPoleMargin = 0.05;

// Free function variables: q for the w-sector and one-variable classes, z for
// the bracket-flat class, (dt, dr, w) for a transported seed function.
struct ModelOptions {
  std::string free_function;  // empty selects the class default
  std::optional<double> t0, r0;
  std::optional<double> p0;  // base slope for the one-variable class
  int orientation = 0;       // power class: sign of v + rho u^2, 0 picks one
  GridSpec grid;
};

struct QuadratureTable {
  std::string name;
  std::vector<GridPoint> points;
  std::vector<double> values;
};

struct ConstructionInfo {
  std::string label;
  std::string kind;
  std::string free_function;
  double t0 = 0, r0 = 0;
  std::vector<std::pair<std::string, double>> constants;
  std::vector<std::string> warnings;
  std::vector<QuadratureTable> tables;
  // Set when the metric is singular at every audited sample.
  bool degenerate = false;

  std::optional<double> constant(const std::string& name) const;
};

struct Construction {
  ModelPtr model;
  ConstructionInfo info;
};

Construction build_power(const ConnectionProfile& pr, const ModelOptions& opt = {});
Construction build_exponential(const ConnectionProfile& pr, const ModelOptions& opt = {});
Construction build_wsector(const ConnectionProfile& pr, const ModelOptions& opt = {});
// Parallel transport of a seed function; the seed is an expression in
// (dt, dr, w), or for profiles with k7..k10 not all zero an expression Xi(z)
// applied as u^2 Xi(v/u^2) with the base-point a, b, c.
Construction build_transport(const ConnectionProfile& pr, const ModelOptions& opt = {});
Construction build_onevar(const ConnectionProfile& pr, const ModelOptions& opt = {});

// Dispatches on the report's label, including mirrored labels.
Construction construct(const ConnectionProfile& pr, const ClassificationReport& rep,
                       const ModelOptions& opt = {});

// Evaluates `inner` with the roles of t and r exchanged.
ModelPtr mirror(ModelPtr inner);

struct Spread {
  double min = 0, max = 0, mean = 0;
  std::size_t count = 0;
  double spread() const { return max - min; }
};
Spread ratio_spread(const Expr& num, const Expr& den, const std::vector<GridPoint>& pts);
Spread lambda_spread(const ConnectionProfile& pr, const GridSpec& g = {});
Spread mu_spread(const ConnectionProfile& pr, const GridSpec& g = {});
// max |d_t ln mu + M~|, |d_r ln mu + N~| over the grid.
double mu_log_derivative_residual(const ConnectionProfile& pr, const GridSpec& g = {});

// One-variable class: the functions K, T at slope p, with d_t I and d_r I
// obtained by quadrature from p0.
std::pair<double, double> onevar_KT(const ConnectionProfile& pr, double t, double r, double p,
                                    double p0);
double onevar_default_p0(const ConnectionProfile& pr, const GridSpec& g = {});

using Matrix3 = std::array<std::array<double, 3>, 3>;
// Transport matrix from (t0, r0) to (t, r) on the reduced (dt, dr, w) space.
Matrix3 transport_matrix(const ConnectionProfile& pr, double t0, double r0, double t, double r,
                         bool t_first = true);
// max |P_(t then r) - P_(r then t)|.
double transport_discrepancy(const ConnectionProfile& pr, double t0, double r0, double t,
                             double r);

}  // namespace berwald
