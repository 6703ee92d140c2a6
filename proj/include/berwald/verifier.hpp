#pragma once

// Numerical verification of a (model, profile) pair: residual and Berwald
// curvature sweeps over random admissible samples, geodesic integration and
// conservation of L along geodesics.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "berwald/connection.hpp"
#include "berwald/finsler.hpp"

namespace berwald {

inline constexpr double kResidualTol = 1e-7;
inline constexpr double kBerwaldTol = 1e-7;
// Samples with a worse metric condition number are skipped by the Berwald
// curvature check.
inline constexpr double kMaxConditionNumber = 1e2;
inline constexpr double kVelocityBox = 2.0;
inline constexpr double kMinSpeed = 0.1;
inline constexpr double kThetaInset = 0.2;
inline constexpr double kLowAcceptance = 0.01;
inline constexpr std::size_t kMaxWitnesses = 10;

struct SweepOptions {
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  double tol = kResidualTol;
  double berwald_tol = kBerwaldTol;
  double max_condition = kMaxConditionNumber;
  double velocity_box = kVelocityBox;
  double min_speed = kMinSpeed;
  std::size_t max_tries_per_sample = 200;
  bool berwald = true;
  // Skips the Berwald curvature check, e.g. for a metric found singular
  // everywhere by the constructor's audit.
  bool degenerate = false;
};

struct Witness {
  SamplePoint point;
  double value = 0;
};

struct CheckResult {
  std::string name;
  double max = 0;
  double tol = 0;
  std::size_t samples = 0;
  bool applicable = true;
  std::string note;
  std::vector<Witness> witnesses;  // failing samples, worst first

  bool pass() const { return !applicable || (samples > 0 && max <= tol); }
};

struct VerificationReport {
  std::string model;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::size_t tries = 0;
  std::size_t ill_conditioned = 0;  // skipped by the Berwald curvature check
  std::size_t singular = 0;         // metric singular at the sample
  std::vector<CheckResult> checks;
  std::vector<std::string> warnings;
  double seconds = 0;

  double acceptance() const {
    return tries == 0 ? 0.0 : static_cast<double>(samples) / static_cast<double>(tries);
  }
  bool pass() const;
  const CheckResult* find(const std::string& name) const;
};

// Draws points uniformly from the domain rectangle times the velocity box,
// rejecting short velocities and points outside the model's cone, and records
// scale-normalized residuals of delta_a L, the Euler identity and the SO(3)
// lifts, plus the Berwald curvature. Sampling continues until both the
// residual checks and the Berwald curvature check have `samples` points.
VerificationReport residual_sweep(const FinslerModel& m, const ConnectionProfile& pr,
                                  const SweepOptions& opt = {});

// Ratio of the largest to the smallest eigenvalue magnitude of g.
double condition_number(const Matrix4& g);

// ---------------------------------------------------------------------------

inline constexpr double kPoleStop = 1e-8;
inline constexpr double kBlowUp = 1e12;

struct Trajectory {
  std::vector<SamplePoint> states;
  double h = 0;
  bool completed = false;
  std::string stop_reason;  // empty when completed
};

// Second derivatives of the coordinates for a state.
using Acceleration = std::function<std::array<double, 4>(const SamplePoint&)>;

Acceleration profile_acceleration(const ConnectionProfile& pr);
Acceleration model_acceleration(const FinslerModel& m);

// Classic RK4 on (x, dx); stops early when r <= 0, sin(theta) <= 1e-8, the
// state norm exceeds 1e12 or the acceleration cannot be evaluated.
Trajectory integrate_geodesic(const Acceleration& acc, const SamplePoint& initial, double h,
                              std::size_t steps);
Trajectory geodesic(const ConnectionProfile& pr, const SamplePoint& initial, double h,
                    std::size_t steps);
Trajectory geodesic(const FinslerModel& m, const SamplePoint& initial, double h,
                    std::size_t steps);

// Order estimated from the final-state differences of runs at h, h/2, h/4.
double measured_order(const Acceleration& acc, const SamplePoint& initial, double h,
                      std::size_t steps);

struct ConservationResult {
  double drift = 0;  // max |L - L0| / max(1, |L0|)
  std::size_t worst_index = 0;
  std::optional<std::size_t> inadmissible_index;
  bool ok() const { return !inadmissible_index.has_value(); }
};
ConservationResult conservation_check(const FinslerModel& m, const Trajectory& traj);

// Columns step,t,r,theta,phi,dt,dr,dtheta,dphi,L; L is left empty without a
// model or where the model is not admissible.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const FinslerModel* m = nullptr);

}  // namespace berwald
