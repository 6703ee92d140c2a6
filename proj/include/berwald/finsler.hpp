#pragma once

// Pseudo-Finsler functions and their canonical objects: metric, geodesic
// spray, nonlinear connection, Berwald curvature and residuals of the
// Berwald, homogeneity and spherical-symmetry conditions.

#include <array>
#include <memory>
#include <string>

#include "berwald/connection.hpp"
#include "berwald/dual.hpp"
#include "berwald/expr.hpp"
#include "berwald/sample.hpp"

namespace berwald {

// Position directions carried by XJet duals.
enum Direction { kDirT = 0, kDirR = 1, kDirTheta = 2, kDirPhi = 3 };

// Every coordinate and velocity as an XJet: velocities are seeded jets, the
// coordinates carry unit position directions, and w carries its exact
// theta-derivative.
struct PointJets {
  XJet t, r, th, ph;
  XJet dt, dr, dth, dph;
  XJet w;
  int order = 0;

  static PointJets make(const SamplePoint& p, int order, bool with_w);
};

// A position-dependent scalar field with known first derivatives, lifted to
// an XJet along the coordinate directions carried by `in`.
XJet lift_field(const PointJets& in, double value, double d_t, double d_r);

class FinslerModel {
 public:
  virtual ~FinslerModel() = default;
  virtual std::string tag() const = 0;
  // L together with its position derivatives in the XJet directions.
  virtual XJet evaluate(const PointJets& in) const = 0;
  virtual bool admissible(const SamplePoint& p) const;
  // False when the model ignores the t, r directions; those derivatives are
  // then taken by finite differences.
  virtual bool has_position_channel() const { return true; }
  virtual bool needs_w() const { return true; }
  // Models whose metric is known to be singular everywhere.
  virtual bool declared_degenerate() const { return false; }
};

using ModelPtr = std::shared_ptr<const FinslerModel>;

// A model given by an expression in t, r, th, ph, dt, dr, dth, dph and w.
class ExprModel : public FinslerModel {
 public:
  explicit ExprModel(const std::string& text, bool position_channel = true,
                     std::string tag = "expression");
  static const VarSet& vars();

  std::string tag() const override { return tag_; }
  XJet evaluate(const PointJets& in) const override;
  bool admissible(const SamplePoint& p) const override;
  bool has_position_channel() const override { return channel_; }
  bool needs_w() const override { return uses_w_; }

 private:
  Expr expr_;
  bool channel_;
  bool uses_w_;
  std::string tag_;
};

struct LocalJets {
  VJet L;
  std::array<VJet, 4> dx;  // position derivatives (t, r, theta, phi)
};

// Throws InadmissiblePoint outside the model's cone.
LocalJets local_jets(const FinslerModel& m, const SamplePoint& p, int order);
VJet eval_L(const FinslerModel& m, const SamplePoint& p, int order);
double eval_L_value(const FinslerModel& m, const SamplePoint& p);

struct MetricResult {
  Matrix4 g{};
  double det = 0;
};
MetricResult metric(const FinslerModel& m, const SamplePoint& p);
double determinant(const Matrix4& a);

// Spray jets G^a from L jets of order n; the result has order n - 2.
std::array<VJet, 4> spray_jets(const LocalJets& jets, const SamplePoint& p);

std::array<double, 4> spray(const FinslerModel& m, const SamplePoint& p);
// N[a][b] = N^a_b = d G^a / d v^b.
Matrix4 nonlinear_connection(const FinslerModel& m, const SamplePoint& p);
double berwald_curvature_norm(const FinslerModel& m, const SamplePoint& p);

// delta_a L for the profile's connection, unnormalized.
std::array<double, 4> horizontal_residuals(const FinslerModel& m, const ConnectionProfile& pr,
                                           const SamplePoint& p);
double euler_residual(const FinslerModel& m, const SamplePoint& p);
std::array<double, 3> so3_residuals(const FinslerModel& m, const SamplePoint& p);

// 1 + |L| + |v| |dL/dv| at the point.
double residual_scale(const FinslerModel& m, const SamplePoint& p);

}  // namespace berwald
