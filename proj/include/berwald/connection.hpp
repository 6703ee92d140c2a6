#pragma once

// Spherically symmetric torsion-free connections given by twelve scalar
// fields k1..k12 of (t, r), together with their curvature coefficients and
// the derived scalar fields used by the classifier and constructors.

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "berwald/expr.hpp"
#include "berwald/sample.hpp"

namespace berwald {

struct Domain {
  double t_min = 0, t_max = 1, r_min = 1, r_max = 2;

  double t_center() const { return 0.5 * (t_min + t_max); }
  double r_center() const { return 0.5 * (r_min + r_max); }
  bool contains(double t, double r) const {
    return t >= t_min && t <= t_max && r >= r_min && r <= r_max;
  }
  Domain transposed() const { return {r_min, r_max, t_min, t_max}; }
};

class ConnectionProfile {
 public:
  ConnectionProfile();
  ConnectionProfile(std::array<Expr, 12> k, Domain domain);
  // Parses twelve expression strings in (t, r); empty strings mean 0.
  static ConnectionProfile parse(const std::array<std::string, 12>& k, Domain domain);

  // 1-based accessors matching the conventional numbering k1..k12.
  const Expr& k(int i) const { return k_.at(i - 1); }
  const Expr& k_t(int i) const { return k_t_.at(i - 1); }
  const Expr& k_r(int i) const { return k_r_.at(i - 1); }
  const Domain& domain() const { return domain_; }

  // Values k1..k12 at a point, stored 0-based.
  std::array<double, 12> values(double t, double r) const;

  // Exchanges the roles of t and r.
  ConnectionProfile swap_roles() const;

 private:
  std::array<Expr, 12> k_, k_t_, k_r_;
  Domain domain_;
};

// Nonlinear connection N[a][b] = N^a_b at a tangent-bundle point, including
// the sphere terms.
using Matrix4 = std::array<std::array<double, 4>, 4>;
Matrix4 nonlinear_from_profile(const ConnectionProfile& pr, const SamplePoint& p);

// Christoffel symbols Gamma[a][b][c] = Gamma^a_bc at (t, r, theta).
using Christoffel = std::array<Matrix4, 4>;
Christoffel christoffel(const ConnectionProfile& pr, double t, double r, double th);

// Entries are 1-based; index 0 is unused.
struct CurvatureTable {
  std::array<double, 15> a{};
  std::array<double, 6> A{}, B{};
};

struct Capitals {
  double A = 0, B = 0, C = 0, D = 0, E = 0, F = 0;
};

struct DerivedCoeffs {
  double a = 0, b = 0, c = 0;
  Capitals base;       // from a_i
  Capitals bracket_t;  // same combinations of A_i
  Capitals bracket_r;  // same combinations of B_i
  double M = 0, M_tilde = 0, N = 0, N_tilde = 0;
};

// Expression trees for every derived field of a profile, built once.
class ConnectionFields {
 public:
  explicit ConnectionFields(const ConnectionProfile& pr);

  const ConnectionProfile& profile() const { return profile_; }
  const Expr& a(int i) const { return a_.at(i); }
  const Expr& A(int i) const { return A_.at(i); }
  const Expr& B(int i) const { return B_.at(i); }

  struct Derived {
    Expr a, b, c;
    Expr A, B, C, D, E, F;
    Expr M, M_tilde, N, N_tilde;
  };
  const Derived& derived_exprs() const { return derived_; }

  CurvatureTable curvature(double t, double r) const;
  // Throws MirroredCase when k10 vanishes at the point.
  DerivedCoeffs derived(double t, double r) const;
  DerivedCoeffs derived(const CurvatureTable& table, const std::array<double, 12>& k) const;

  // Named scalar fields in a stable order, for tabulation.
  std::vector<std::pair<std::string, double>> tabulate(double t, double r) const;

 private:
  ConnectionProfile profile_;
  std::array<Expr, 15> a_;
  std::array<Expr, 6> A_, B_;
  Derived derived_;
};

Capitals capitals(double a, double b, double c, const std::array<double, 6>& x);

struct UVZ {
  double u = 0, v = 0, z = 0;
  bool z_defined = false;
};
UVZ uvz(const SamplePoint& p, const DerivedCoeffs& dc);

}  // namespace berwald
