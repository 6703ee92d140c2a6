#include "berwald/verifier.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "berwald/errors.hpp"

namespace berwald {

namespace {

class Tracker {
 public:
  Tracker(std::string name, double tol) {
    result_.name = std::move(name);
    result_.tol = tol;
  }

  void record(double value, const SamplePoint& p) {
    if (std::isnan(value)) value = INFINITY;
    ++result_.samples;
    result_.max = std::max(result_.max, value);
    if (value > result_.tol) failures_.push_back({p, value});
  }

  CheckResult finish() {
    std::stable_sort(failures_.begin(), failures_.end(),
                     [](const Witness& a, const Witness& b) { return a.value > b.value; });
    if (failures_.size() > kMaxWitnesses) failures_.resize(kMaxWitnesses);
    result_.witnesses = std::move(failures_);
    return std::move(result_);
  }

  CheckResult& result() { return result_; }

 private:
  CheckResult result_;
  std::vector<Witness> failures_;
};

double state_norm(const SamplePoint& s) {
  double acc = 0.0;
  for (double x : {s.t, s.r, s.th, s.ph, s.dt, s.dr, s.dth, s.dph}) acc += x * x;
  return std::sqrt(acc);
}

SamplePoint axpy(const SamplePoint& s, double h, const std::array<double, 4>& dx,
                 const std::array<double, 4>& dv) {
  SamplePoint out = s;
  out.t += h * dx[0];
  out.r += h * dx[1];
  out.th += h * dx[2];
  out.ph += h * dx[3];
  out.dt += h * dv[0];
  out.dr += h * dv[1];
  out.dth += h * dv[2];
  out.dph += h * dv[3];
  return out;
}

std::string stop_reason(const SamplePoint& s) {
  if (!(s.r > 0.0)) return "r reached zero";
  if (!(std::fabs(std::sin(s.th)) > kPoleStop)) return "reached the pole";
  if (!(state_norm(s) <= kBlowUp)) return "state norm exceeded 1e12";
  return {};
}

void append_number(std::ostream& out, double x) {
  if (x == 0.0) x = 0.0;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.write(buf, res.ptr - buf);
}

}  // namespace

bool VerificationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass(); });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

double condition_number(const Matrix4& g) {
  Eigen::Matrix4d m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m(a, b) = g[a][b];
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(m, Eigen::EigenvaluesOnly);
  const Eigen::Vector4d ev = solver.eigenvalues().cwiseAbs();
  if (ev.minCoeff() == 0.0) return INFINITY;
  return ev.maxCoeff() / ev.minCoeff();
}

VerificationReport residual_sweep(const FinslerModel& m, const ConnectionProfile& pr,
                                  const SweepOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport rep;
  rep.model = m.tag();
  rep.seed = opt.seed;

  const Domain& d = pr.domain();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> ut(d.t_min, d.t_max), ur(d.r_min, d.r_max);
  std::uniform_real_distribution<double> uth(kThetaInset, std::numbers::pi - kThetaInset);
  std::uniform_real_distribution<double> uph(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> uv(-opt.velocity_box, opt.velocity_box);

  const std::array<const char*, 4> names{"horizontal_t", "horizontal_r", "horizontal_theta",
                                         "horizontal_phi"};
  std::vector<Tracker> horizontal;
  for (const char* n : names) horizontal.emplace_back(n, opt.tol);
  Tracker euler("euler", opt.tol), so3("so3", opt.tol);
  Tracker berwald("berwald_curvature", opt.berwald_tol);

  const bool degenerate = opt.degenerate || m.declared_degenerate();
  const bool want_berwald = opt.berwald && !degenerate;
  const std::size_t max_tries = opt.samples * opt.max_tries_per_sample;
  auto more = [&] {
    if (rep.samples < opt.samples) return true;
    return want_berwald && berwald.result().samples < opt.samples;
  };
  while (more() && rep.tries < max_tries) {
    ++rep.tries;
    const SamplePoint p{ut(rng), ur(rng), uth(rng), uph(rng), uv(rng), uv(rng), uv(rng), uv(rng)};
    if (p.speed() < opt.min_speed) continue;
    if (!m.admissible(p)) continue;

    if (rep.samples < opt.samples) {
      double scale = 0;
      std::array<double, 4> h{};
      double e = 0;
      std::array<double, 3> s{};
      try {
        scale = residual_scale(m, p);
        h = horizontal_residuals(m, pr, p);
        e = euler_residual(m, p);
        s = so3_residuals(m, p);
      } catch (const InadmissiblePoint&) {
        continue;
      } catch (const DomainError&) {
        continue;
      }
      ++rep.samples;
      for (int a = 0; a < 4; ++a) horizontal[a].record(std::fabs(h[a]) / scale, p);
      euler.record(e / scale, p);
      so3.record(*std::max_element(s.begin(), s.end()) / scale, p);
    }

    if (!want_berwald) continue;
    try {
      const MetricResult g = metric(m, p);
      if (!(condition_number(g.g) <= opt.max_condition)) {
        ++rep.ill_conditioned;
        continue;
      }
      berwald.record(berwald_curvature_norm(m, p), p);
    } catch (const SingularMetric&) {
      ++rep.singular;
    } catch (const InadmissiblePoint&) {
    } catch (const DomainError&) {
    }
  }

  for (auto& t : horizontal) rep.checks.push_back(t.finish());
  rep.checks.push_back(euler.finish());
  rep.checks.push_back(so3.finish());
  if (!opt.berwald) {
    berwald.result().applicable = false;
    berwald.result().note = "disabled";
  } else if (degenerate) {
    berwald.result().applicable = false;
    berwald.result().note = "metric is degenerate for this model";
  } else if (berwald.result().samples < opt.samples) {
    berwald.result().note = "only " + std::to_string(berwald.result().samples) +
                            " well-conditioned samples";
  }
  rep.checks.push_back(berwald.finish());

  if (rep.samples < opt.samples)
    rep.warnings.push_back("only " + std::to_string(rep.samples) + " of " +
                           std::to_string(opt.samples) + " samples found in the cone");
  if (rep.acceptance() < kLowAcceptance)
    rep.warnings.push_back("acceptance rate below 1%: the cone is thin in the sampling box");
  if (rep.ill_conditioned > 0)
    rep.warnings.push_back(std::to_string(rep.ill_conditioned) +
                           " samples skipped by the Berwald curvature check (condition number)");
  if (rep.singular > 0)
    rep.warnings.push_back("metric singular at " + std::to_string(rep.singular) + " samples");
  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// ---------------------------------------------------------------------------

Acceleration profile_acceleration(const ConnectionProfile& pr) {
  return [pr](const SamplePoint& s) {
    const Christoffel g = christoffel(pr, s.t, s.r, s.th);
    const auto v = s.v();
    std::array<double, 4> out{};
    for (int a = 0; a < 4; ++a) {
      double acc = 0.0;
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) acc += g[a][b][c] * v[b] * v[c];
      out[a] = -acc;
    }
    return out;
  };
}

Acceleration model_acceleration(const FinslerModel& m) {
  return [&m](const SamplePoint& s) {
    const auto G = spray(m, s);
    return std::array<double, 4>{-2.0 * G[0], -2.0 * G[1], -2.0 * G[2], -2.0 * G[3]};
  };
}

Trajectory integrate_geodesic(const Acceleration& acc, const SamplePoint& initial, double h,
                              std::size_t steps) {
  Trajectory traj;
  traj.h = h;
  traj.states.reserve(steps + 1);
  traj.states.push_back(initial);
  if (auto why = stop_reason(initial); !why.empty()) {
    traj.stop_reason = why + " at step 0";
    return traj;
  }
  SamplePoint s = initial;
  for (std::size_t i = 0; i < steps; ++i) {
    try {
      const auto x1 = s.v();
      const auto v1 = acc(s);
      const SamplePoint s2 = axpy(s, 0.5 * h, x1, v1);
      const auto x2 = s2.v();
      const auto v2 = acc(s2);
      const SamplePoint s3 = axpy(s, 0.5 * h, x2, v2);
      const auto x3 = s3.v();
      const auto v3 = acc(s3);
      const SamplePoint s4 = axpy(s, h, x3, v3);
      const auto x4 = s4.v();
      const auto v4 = acc(s4);
      std::array<double, 4> dx{}, dv{};
      for (int a = 0; a < 4; ++a) {
        dx[a] = (x1[a] + 2.0 * x2[a] + 2.0 * x3[a] + x4[a]) / 6.0;
        dv[a] = (v1[a] + 2.0 * v2[a] + 2.0 * v3[a] + v4[a]) / 6.0;
      }
      s = axpy(s, h, dx, dv);
    } catch (const std::runtime_error& e) {
      traj.stop_reason = std::string(e.what()) + " at step " + std::to_string(i + 1);
      return traj;
    }
    traj.states.push_back(s);
    if (auto why = stop_reason(s); !why.empty()) {
      traj.stop_reason = why + " at step " + std::to_string(i + 1);
      return traj;
    }
  }
  traj.completed = true;
  return traj;
}

Trajectory geodesic(const ConnectionProfile& pr, const SamplePoint& initial, double h,
                    std::size_t steps) {
  return integrate_geodesic(profile_acceleration(pr), initial, h, steps);
}

Trajectory geodesic(const FinslerModel& m, const SamplePoint& initial, double h,
                    std::size_t steps) {
  return integrate_geodesic(model_acceleration(m), initial, h, steps);
}

double measured_order(const Acceleration& acc, const SamplePoint& initial, double h,
                      std::size_t steps) {
  const Trajectory a = integrate_geodesic(acc, initial, h, steps);
  const Trajectory b = integrate_geodesic(acc, initial, 0.5 * h, 2 * steps);
  const Trajectory c = integrate_geodesic(acc, initial, 0.25 * h, 4 * steps);
  if (!a.completed || !b.completed || !c.completed)
    throw DomainError("geodesic stopped early during the order measurement");
  auto diff = [](const SamplePoint& x, const SamplePoint& y) {
    SamplePoint d = x;
    d.t -= y.t, d.r -= y.r, d.th -= y.th, d.ph -= y.ph;
    d.dt -= y.dt, d.dr -= y.dr, d.dth -= y.dth, d.dph -= y.dph;
    return state_norm(d);
  };
  const double e1 = diff(a.states.back(), b.states.back());
  const double e2 = diff(b.states.back(), c.states.back());
  if (e2 == 0.0) return INFINITY;
  return std::log2(e1 / e2);
}

ConservationResult conservation_check(const FinslerModel& m, const Trajectory& traj) {
  ConservationResult out;
  if (traj.states.empty()) return out;
  double L0 = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const SamplePoint& s = traj.states[i];
    double L = 0.0;
    try {
      if (!m.admissible(s)) throw InadmissiblePoint("state left the cone");
      L = eval_L_value(m, s);
    } catch (const std::runtime_error&) {
      out.inadmissible_index = i;
      return out;
    }
    if (i == 0) {
      L0 = L;
      continue;
    }
    const double drift = std::fabs(L - L0) / std::max(1.0, std::fabs(L0));
    if (drift > out.drift) {
      out.drift = drift;
      out.worst_index = i;
    }
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const FinslerModel* m) {
  out << "step,t,r,theta,phi,dt,dr,dtheta,dphi,L\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const SamplePoint& s = traj.states[i];
    out << i;
    for (double x : {s.t, s.r, s.th, s.ph, s.dt, s.dr, s.dth, s.dph}) {
      out << ',';
      append_number(out, x);
    }
    out << ',';
    if (m != nullptr && m->admissible(s)) {
      try {
        append_number(out, eval_L_value(*m, s));
      } catch (const std::runtime_error&) {
      }
    }
    out << '\n';
  }
}

}  // namespace berwald
