#include "berwald/constructor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>

#include "berwald/errors.hpp"
#include "berwald/quadrature.hpp"

namespace berwald {

namespace {

constexpr int kSlotP = 2;
constexpr int kTableSide = 5;
constexpr int kMaxTransportSteps = 1 << 16;
constexpr double kAuditDetRel = 1e-12;

const char* const kDefaultXiW = "1 + 1/q + 1/q^2";
const char* const kDefaultXiOneVar = "q^2 - 1 + q^4/10";
const char* const kDefaultXiFlat = "1 + z + z^2/10";
const char* const kDefaultSeed = "sqrt(dt^4 + dr^4 + w^4)";

using PJet = Jet<1, 5>;

XJet eval_field(const Expr& e, const PointJets& in) {
  const std::array<XJet, 2> args{in.t, in.r};
  return e.evaluate<XJet>(args);
}

XJet eval_unary(const Expr& e, const XJet& x) {
  const std::array<XJet, 1> args{x};
  return e.evaluate<XJet>(args);
}

double base_t(const PointJets& in) { return base_value(in.t); }
double base_r(const PointJets& in) { return base_value(in.r); }

std::pair<double, double> base_point(const ConnectionProfile& pr, const ModelOptions& opt) {
  const Domain& d = pr.domain();
  const double t0 = opt.t0.value_or(d.t_center());
  const double r0 = opt.r0.value_or(d.r_center());
  if (!d.contains(t0, r0)) throw ConstructionError("base point lies outside the domain");
  return {t0, r0};
}

QuadratureTable tabulate(const std::string& name, const Domain& d, const LineIntegral& li) {
  QuadratureTable out{name, {}, {}};
  GridSpec g;
  g.nt = g.nr = kTableSide;
  for (const auto& p : regular_grid(d, g)) {
    out.points.push_back(p);
    out.values.push_back(li(p.t, p.r));
  }
  return out;
}

// Velocity-space pieces u = dt - a dr and v = c dr^2 + 2 b dt dr - w^2.
struct UV {
  XJet u, v;
};

UV uv_jets(const XJet& a, const XJet& b, const XJet& c, const PointJets& in) {
  UV out;
  out.u = in.dt - a * in.dr;
  out.v = c * in.dr * in.dr + 2.0 * (b * in.dt * in.dr) - in.w * in.w;
  return out;
}

struct UVValues {
  double u, v;
};

UVValues uv_values(double a, double b, double c, const SamplePoint& p) {
  const double w = p.w();
  return {p.dt - a * p.dr, c * p.dr * p.dr + 2.0 * b * p.dt * p.dr - w * w};
}

struct Coefficients {
  Expr a, b, c;
};

Coefficients coefficient_exprs(const ConnectionFields& f) {
  const auto& d = f.derived_exprs();
  return {d.a, d.b, d.c};
}

// ---------------------------------------------------------------------------

class PowerModel final : public FinslerModel {
 public:
  PowerModel(Coefficients co, Expr rho, LineIntegral log_theta, double lambda, int sigma)
      : co_(std::move(co)), rho_(std::move(rho)), log_theta_(std::move(log_theta)),
        lambda_(lambda), sigma_(sigma) {}

  std::string tag() const override { return "power"; }

  XJet evaluate(const PointJets& in) const override {
    const double t = base_t(in), r = base_r(in);
    const double theta = std::exp(log_theta_(t, r));
    const XJet scale = lift_field(in, theta, theta * log_theta_.P(t, r), theta * log_theta_.Q(t, r));
    const UV uv = uv_jets(eval_field(co_.a, in), eval_field(co_.b, in), eval_field(co_.c, in), in);
    const XJet s = (uv.v + eval_field(rho_, in) * uv.u * uv.u) * static_cast<double>(sigma_);
    if (!(base_value(s) > 0.0) || base_value(uv.u) == 0.0)
      throw InadmissiblePoint("velocity outside the power-law cone");
    return scale * pow(uv.u * uv.u, 1.0 - lambda_) * pow(s, lambda_);
  }

  bool admissible(const SamplePoint& p) const override {
    if (!(p.w() > 0.0)) return false;
    const auto uv = uv_values(co_.a.eval(p.t, p.r), co_.b.eval(p.t, p.r), co_.c.eval(p.t, p.r), p);
    const double s = sigma_ * (uv.v + rho_.eval(p.t, p.r) * uv.u * uv.u);
    return uv.u != 0.0 && s > 0.0 && std::isfinite(s);
  }

 private:
  Coefficients co_;
  Expr rho_;
  LineIntegral log_theta_;
  double lambda_;
  int sigma_;
};

class ExponentialModel final : public FinslerModel {
 public:
  ExponentialModel(Coefficients co, Expr mu, LineIntegral log_phi)
      : co_(std::move(co)), mu_(std::move(mu)), log_phi_(std::move(log_phi)) {}

  std::string tag() const override { return "exponential"; }

  XJet evaluate(const PointJets& in) const override {
    const double t = base_t(in), r = base_r(in);
    const double phi = std::exp(log_phi_(t, r));
    const XJet scale = lift_field(in, phi, phi * log_phi_.P(t, r), phi * log_phi_.Q(t, r));
    const UV uv = uv_jets(eval_field(co_.a, in), eval_field(co_.b, in), eval_field(co_.c, in), in);
    if (base_value(uv.u) == 0.0) throw InadmissiblePoint("u vanishes");
    const XJet u2 = uv.u * uv.u;
    return scale * u2 * exp(eval_field(mu_, in) * (uv.v / u2));
  }

  bool admissible(const SamplePoint& p) const override {
    if (!(p.w() > 0.0)) return false;
    return p.dt - co_.a.eval(p.t, p.r) * p.dr != 0.0;
  }

 private:
  Coefficients co_;
  Expr mu_;
  LineIntegral log_phi_;
};

class WsectorModel final : public FinslerModel {
 public:
  WsectorModel(Expr a, LineIntegral f, Expr xi)
      : a_(std::move(a)), f_(std::move(f)), xi_(std::move(xi)) {}

  std::string tag() const override { return "wsector"; }
  bool declared_degenerate() const override { return true; }

  XJet evaluate(const PointJets& in) const override {
    const double t = base_t(in), r = base_r(in);
    const XJet f = lift_field(in, f_(t, r), f_.P(t, r), f_.Q(t, r));
    const XJet u = in.dt - eval_field(a_, in) * in.dr;
    if (base_value(u) == 0.0) throw InadmissiblePoint("u vanishes");
    const XJet w2 = in.w * in.w;
    const XJet q = -(w2 / (u * u)) * exp(-f);
    return -(w2 * eval_unary(xi_, q));
  }

  bool admissible(const SamplePoint& p) const override {
    if (!(p.w() > 0.0)) return false;
    return p.dt - a_.eval(p.t, p.r) * p.dr != 0.0 && FinslerModel::admissible(p);
  }

 private:
  Expr a_;
  LineIntegral f_;
  Expr xi_;
};

// ---------------------------------------------------------------------------

Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
  Matrix3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
  return out;
}

Matrix3 identity3() {
  Matrix3 m{};
  for (int i = 0; i < 3; ++i) m[i][i] = 1.0;
  return m;
}

Matrix3 gamma_t(const std::array<double, 12>& k) {
  return {{{k[0], k[1], 0}, {k[3], k[5], 0}, {0, 0, k[7]}}};
}

Matrix3 gamma_r(const std::array<double, 12>& k) {
  return {{{k[1], k[2], 0}, {k[5], k[4], 0}, {0, 0, k[8]}}};
}

Matrix3 axpy(const Matrix3& x, double s, const Matrix3& y) {
  Matrix3 out = x;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] += s * y[i][j];
  return out;
}

double max_diff(const Matrix3& a, const Matrix3& b) {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::fabs(a[i][j] - b[i][j]));
  return worst;
}

// Solves dP/ds = P Gamma(s) from s0 to s1 with RK4 and step doubling.
Matrix3 transport_leg(const ConnectionProfile& pr, const Matrix3& start, bool along_t,
                      double fixed, double s0, double s1) {
  if (s0 == s1) return start;
  auto gamma = [&](double s) {
    return along_t ? gamma_t(pr.values(s, fixed)) : gamma_r(pr.values(fixed, s));
  };
  auto run = [&](int n) {
    const double h = (s1 - s0) / n;
    Matrix3 P = start;
    for (int i = 0; i < n; ++i) {
      const double s = s0 + i * h;
      const Matrix3 g0 = gamma(s), gm = gamma(s + 0.5 * h), g1 = gamma(s + h);
      const Matrix3 k1 = multiply(P, g0);
      const Matrix3 k2 = multiply(axpy(P, 0.5 * h, k1), gm);
      const Matrix3 k3 = multiply(axpy(P, 0.5 * h, k2), gm);
      const Matrix3 k4 = multiply(axpy(P, h, k3), g1);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          P[a][b] += h / 6.0 * (k1[a][b] + 2.0 * k2[a][b] + 2.0 * k3[a][b] + k4[a][b]);
    }
    return P;
  };
  Matrix3 coarse = run(8);
  for (int n = 16; n <= kMaxTransportSteps; n *= 2) {
    const Matrix3 fine = run(n);
    if (max_diff(fine, coarse) < kTransportTol) return fine;
    coarse = fine;
  }
  throw ConstructionError("parallel transport did not converge");
}

using SeedFn = std::function<XJet(const XJet&, const XJet&, const XJet&)>;

class TransportModel final : public FinslerModel {
 public:
  TransportModel(ConnectionProfile pr, double t0, double r0, SeedFn seed)
      : pr_(std::move(pr)), t0_(t0), r0_(r0), seed_(std::move(seed)) {}

  std::string tag() const override { return "transport"; }

  XJet evaluate(const PointJets& in) const override {
    const double t = base_t(in), r = base_r(in);
    const Matrix3 P = matrix(t, r);
    const auto k = pr_.values(t, r);
    const Matrix3 Pt = multiply(P, gamma_t(k)), Pr = multiply(P, gamma_r(k));
    const std::array<const XJet*, 3> y{&in.dt, &in.dr, &in.w};
    std::array<XJet, 3> Y;
    for (int i = 0; i < 3; ++i) {
      XJet acc = constant_like(in.dt, 0.0);
      VJet dt_part = constant_like(in.dt.v, 0.0), dr_part = constant_like(in.dt.v, 0.0);
      for (int j = 0; j < 3; ++j) {
        acc += P[i][j] * *y[j];
        dt_part += Pt[i][j] * y[j]->v;
        dr_part += Pr[i][j] * y[j]->v;
      }
      for (int c = 0; c < 4; ++c) acc.d[c] += dt_part * in.t.d[c] + dr_part * in.r.d[c];
      Y[i] = acc;
    }
    return seed_(Y[0], Y[1], Y[2]);
  }

 private:
  Matrix3 matrix(double t, double r) const {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (cached_ && cache_t_ == t && cache_r_ == r) return cache_;
    }
    const Matrix3 P = transport_matrix(pr_, t0_, r0_, t, r);
    std::lock_guard<std::mutex> lock(mutex_);
    cached_ = true;
    cache_t_ = t;
    cache_r_ = r;
    cache_ = P;
    return P;
  }

  ConnectionProfile pr_;
  double t0_, r0_;
  SeedFn seed_;
  mutable std::mutex mutex_;
  mutable bool cached_ = false;
  mutable double cache_t_ = 0, cache_r_ = 0;
  mutable Matrix3 cache_{};
};

// ---------------------------------------------------------------------------

// Expressions in (t, r, p) for the one-variable class.
struct OneVarFields {
  Expr g, g_t, g_r;
  Expr K_local, T_local;  // K, T without the d_t I, d_r I terms
  Expr den_a, den_b, den_c;  // denominator coefficients in (t, r)

  explicit OneVarFields(const ConnectionProfile& pr) {
    const ConnectionFields f(pr);
    const Expr p = Expr::variable(kSlotP, "p");
    const Expr &a1 = f.a(1), &a2 = f.a(2), &a3 = f.a(3), &a4 = f.a(4);
    den_a = a2;
    den_b = -(a4 - a1);
    den_c = -a3;
    g = (a1 + a2 * p) / (den_a * p * p + den_b * p + den_c);
    g_t = diff(g, 0);
    g_r = diff(g, 1);
    auto k = [&](int i) -> const Expr& { return pr.k(i); };
    K_local = -(k(1) + k(2) * p) + (k(1) * p + k(2) * p * p - k(4) - k(6) * p) * g;
    T_local = -(k(2) + k(3) * p) + (k(2) * p + k(3) * p * p - k(6) - k(5) * p) * g;
  }

  static double at(const Expr& e, double t, double r, double p) {
    const std::array<double, 3> v{t, r, p};
    return e.eval(v);
  }

  // True when the denominator has no zero on the closed interval [p0, p].
  bool clear(double t, double r, double p0, double p) const {
    const double A = den_a.eval(t, r), B = den_b.eval(t, r), C = den_c.eval(t, r);
    const double lo = std::min(p0, p), hi = std::max(p0, p);
    auto inside = [&](double x) { return x >= lo && x <= hi; };
    if (A == 0.0) {
      if (B == 0.0) return C != 0.0;
      return !inside(-C / B);
    }
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) return true;
    const double s = std::sqrt(disc);
    const double q = -0.5 * (B + std::copysign(s, B));
    const double x1 = q / A;
    const double x2 = q != 0.0 ? C / q : x1;
    return !inside(x1) && !inside(x2);
  }

  // |denominator| relative to the sum of its term magnitudes.
  double margin(double t, double r, double p) const {
    const double A = den_a.eval(t, r), B = den_b.eval(t, r), C = den_c.eval(t, r);
    const double scale = std::fabs(A) * p * p + std::fabs(B * p) + std::fabs(C);
    if (scale == 0.0) return 0.0;
    return std::fabs(A * p * p + B * p + C) / scale;
  }

  double integral(const Expr& e, double t, double r, double p0, double p) const {
    return integrate([&](double s) { return at(e, t, r, s); }, p0, p);
  }

  std::array<double, 6> p_derivatives(const Expr& e, double t, double r, double p) const {
    const std::array<PJet, 3> args{PJet::constant(t, 5), PJet::constant(r, 5),
                                   PJet::variable(p, 0, 5)};
    const PJet j = e.evaluate<PJet>(args);
    std::array<double, 6> out{};
    for (int k = 0; k <= 5; ++k) out[k] = j.partial({k});
    return out;
  }
};

class OneVarModel final : public FinslerModel {
 public:
  OneVarModel(std::shared_ptr<const OneVarFields> fields, double p0, LineIntegral phi, Expr xi)
      : f_(std::move(fields)), p0_(p0), phi_(std::move(phi)), xi_(std::move(xi)) {}

  std::string tag() const override { return "onevar"; }

  XJet evaluate(const PointJets& in) const override {
    const double t = base_t(in), r = base_r(in);
    const double dt = base_value(in.dt);
    if (dt == 0.0) throw InadmissiblePoint("dt vanishes");
    const double p = base_value(in.dr) / dt;
    if (!f_->clear(t, r, p0_, p)) throw InadmissiblePoint("slope crosses a pole of the integrand");
    auto shifted = [](double head, const std::array<double, 6>& tail) {
      std::array<double, 6> s{};
      s[0] = head;
      for (int k = 1; k <= 5; ++k) s[k] = tail[k - 1];
      return s;
    };
    const auto g = f_->p_derivatives(f_->g, t, r, p);
    const auto gt = f_->p_derivatives(f_->g_t, t, r, p);
    const auto gr = f_->p_derivatives(f_->g_r, t, r, p);
    const auto seq_I = shifted(f_->integral(f_->g, t, r, p0_, p), g);
    const auto seq_It = shifted(f_->integral(f_->g_t, t, r, p0_, p), gt);
    const auto seq_Ir = shifted(f_->integral(f_->g_r, t, r, p0_, p), gr);

    const XJet slope = in.dr / in.dt;
    XJet I;
    I.v = VJet::compose(slope.v, seq_I);
    const VJet It = VJet::compose(slope.v, seq_It), Ir = VJet::compose(slope.v, seq_Ir);
    const VJet Ip = VJet::compose(slope.v, g);
    for (int c = 0; c < 4; ++c) I.d[c] = It * in.t.d[c] + Ir * in.r.d[c] + Ip * slope.d[c];

    const XJet phi = lift_field(in, phi_(t, r), phi_.P(t, r), phi_.Q(t, r));
    const XJet q = in.dt * exp(I - phi) / in.w;
    return in.w * in.w * eval_unary(xi_, q);
  }

  bool admissible(const SamplePoint& p) const override {
    if (!(p.w() > 0.0) || p.dt == 0.0) return false;
    const double slope = p.dr / p.dt;
    return f_->clear(p.t, p.r, p0_, slope) && f_->margin(p.t, p.r, slope) >= kPoleMargin;
  }

 private:
  std::shared_ptr<const OneVarFields> f_;
  double p0_;
  LineIntegral phi_;
  Expr xi_;
};

class MirroredModel final : public FinslerModel {
 public:
  explicit MirroredModel(ModelPtr inner) : inner_(std::move(inner)) {}

  std::string tag() const override { return "mirrored(" + inner_->tag() + ")"; }
  XJet evaluate(const PointJets& in) const override {
    PointJets s = in;
    std::swap(s.t, s.r);
    std::swap(s.dt, s.dr);
    return inner_->evaluate(s);
  }
  bool admissible(const SamplePoint& p) const override {
    SamplePoint s = p;
    std::swap(s.t, s.r);
    std::swap(s.dt, s.dr);
    return inner_->admissible(s);
  }
  bool has_position_channel() const override { return inner_->has_position_channel(); }
  bool needs_w() const override { return inner_->needs_w(); }
  bool declared_degenerate() const override { return inner_->declared_degenerate(); }

 private:
  ModelPtr inner_;
};

// ---------------------------------------------------------------------------

double grid_max_abs(const Expr& e, const std::vector<GridPoint>& pts) {
  double worst = 0.0;
  for (const auto& p : pts) worst = std::max(worst, std::fabs(e.eval(p.t, p.r)));
  return worst;
}

// Samples the model's cone near the base point and warns about a singular metric.
void audit_metric(const FinslerModel& m, const ConnectionProfile& pr, ConstructionInfo& info) {
  if (m.declared_degenerate()) {
    info.degenerate = true;
    info.warnings.push_back(
        "metric is degenerate: L depends on the velocities only through u and w");
    return;
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> vel(-2.0, 2.0), th(0.5, 2.6);
  const Domain& d = pr.domain();
  std::uniform_real_distribution<double> tt(d.t_min, d.t_max), rr(d.r_min, d.r_max);
  int checked = 0, singular = 0;
  for (int i = 0; i < 200 && checked < 10; ++i) {
    const SamplePoint p{tt(rng), rr(rng), th(rng), 1.0, vel(rng), vel(rng), vel(rng), vel(rng)};
    if (!m.admissible(p)) continue;
    ++checked;
    try {
      const auto g = metric(m, p);
      double scale = 0.0;
      for (const auto& row : g.g)
        for (double e : row) scale = std::max(scale, std::fabs(e));
      if (!(std::fabs(g.det) >= kAuditDetRel * std::pow(scale, 4))) ++singular;
    } catch (const std::runtime_error&) {
      ++singular;
    }
  }
  if (checked == 0)
    info.warnings.push_back("no admissible velocity found while auditing the metric");
  else if (singular > 0) {
    info.degenerate = singular == checked;
    info.warnings.push_back("metric singular at " + std::to_string(singular) + " of " +
                            std::to_string(checked) + " audit samples");
  }
}

Construction finish(ModelPtr model, ConstructionInfo info, const ConnectionProfile& pr) {
  audit_metric(*model, pr, info);
  return {std::move(model), std::move(info)};
}

bool delta_w_trivial(const ConnectionProfile& pr, const GridSpec& g) {
  const auto pts = regular_grid(pr.domain(), g);
  for (int i = 7; i <= 10; ++i)
    if (grid_max_abs(pr.k(i), pts) > 0.0) return false;
  return true;
}

}  // namespace

std::optional<double> ConstructionInfo::constant(const std::string& name) const {
  for (const auto& [key, value] : constants)
    if (key == name) return value;
  return std::nullopt;
}

Spread ratio_spread(const Expr& num, const Expr& den, const std::vector<GridPoint>& pts) {
  const double den_scale = grid_max_abs(den, pts);
  Spread s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -s.min;
  double sum = 0.0;
  for (const auto& p : pts) {
    const double d = den.eval(p.t, p.r);
    if (!(std::fabs(d) > kConstancyTol * den_scale)) continue;
    const double x = num.eval(p.t, p.r) / d;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
    sum += x;
    ++s.count;
  }
  if (s.count == 0) throw ConstructionError("denominator vanishes on the whole grid");
  s.mean = sum / static_cast<double>(s.count);
  return s;
}

Spread lambda_spread(const ConnectionProfile& pr, const GridSpec& g) {
  const ConnectionFields f(pr);
  return ratio_spread(f.derived_exprs().F, f.derived_exprs().D, grid_points(pr.domain(), g));
}

Spread mu_spread(const ConnectionProfile& pr, const GridSpec& g) {
  const ConnectionFields f(pr);
  return ratio_spread(f.derived_exprs().F, f.derived_exprs().E, grid_points(pr.domain(), g));
}

double mu_log_derivative_residual(const ConnectionProfile& pr, const GridSpec& g) {
  const ConnectionFields f(pr);
  const auto& d = f.derived_exprs();
  const Expr mu = d.F / d.E;
  const Expr lt = diff(mu, 0) / mu + d.M_tilde;
  const Expr lr = diff(mu, 1) / mu + d.N_tilde;
  const auto pts = grid_points(pr.domain(), g);
  return std::max(grid_max_abs(lt, pts), grid_max_abs(lr, pts));
}

std::pair<double, double> onevar_KT(const ConnectionProfile& pr, double t, double r, double p,
                                    double p0) {
  const OneVarFields f(pr);
  if (!f.clear(t, r, p0, p)) throw DomainError("slope interval crosses a pole of the integrand");
  const double K = f.integral(f.g_t, t, r, p0, p) + OneVarFields::at(f.K_local, t, r, p);
  const double T = f.integral(f.g_r, t, r, p0, p) + OneVarFields::at(f.T_local, t, r, p);
  return {K, T};
}

double onevar_default_p0(const ConnectionProfile& pr, const GridSpec& g) {
  const OneVarFields f(pr);
  const auto pts = regular_grid(pr.domain(), g);
  double best = -1.0, best_margin = 0.0;
  for (double p0 : {0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0}) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& pt : pts) {
      const double A = f.den_a.eval(pt.t, pt.r), B = f.den_b.eval(pt.t, pt.r),
                   C = f.den_c.eval(pt.t, pt.r);
      const double den = A * p0 * p0 + B * p0 + C;
      const double scale = std::fabs(A) * p0 * p0 + std::fabs(B * p0) + std::fabs(C);
      margin = std::min(margin, scale > 0.0 ? std::fabs(den) / scale : 0.0);
    }
    if (margin > best_margin) {
      best_margin = margin;
      best = p0;
    }
  }
  if (!(best_margin > 0.0))
    throw ConstructionError("no base slope keeps the integrand denominator away from zero");
  return best;
}

Matrix3 transport_matrix(const ConnectionProfile& pr, double t0, double r0, double t, double r,
                         bool t_first) {
  if (t_first) {
    const Matrix3 mid = transport_leg(pr, identity3(), true, r0, t0, t);
    return transport_leg(pr, mid, false, t, r0, r);
  }
  const Matrix3 mid = transport_leg(pr, identity3(), false, t0, r0, r);
  return transport_leg(pr, mid, true, r, t0, t);
}

double transport_discrepancy(const ConnectionProfile& pr, double t0, double r0, double t,
                             double r) {
  return max_diff(transport_matrix(pr, t0, r0, t, r, true),
                  transport_matrix(pr, t0, r0, t, r, false));
}

ModelPtr mirror(ModelPtr inner) { return std::make_shared<MirroredModel>(std::move(inner)); }

// ---------------------------------------------------------------------------

Construction build_power(const ConnectionProfile& pr, const ModelOptions& opt) {
  const ConnectionFields fields(pr);
  const auto& d = fields.derived_exprs();
  const auto [t0, r0] = base_point(pr, opt);
  const auto pts = grid_points(pr.domain(), opt.grid);
  const Spread lam = ratio_spread(d.F, d.D, pts);
  if (!(lam.spread() <= kConstancyTol * (1.0 + std::fabs(lam.mean))))
    throw ConstructionError("F/D is not constant on the grid (spread " +
                            std::to_string(lam.spread()) + ")");
  const double lambda = lam.mean;
  const Expr rho = d.E / d.D;
  const LineIntegral log_theta = LineIntegral::from_exprs(d.M - lambda * d.M_tilde,
                                                          d.N - lambda * d.N_tilde, t0, r0);
  const double curl = log_theta.require_closed(pts, kCurlTol);
  const double rho0 = rho.eval(t0, r0);
  int sigma = opt.orientation;
  if (sigma == 0) sigma = rho0 > 0.0 ? 1 : -1;
  if (sigma != 1 && sigma != -1) throw ConstructionError("orientation must be +1 or -1");

  ConstructionInfo info;
  info.label = label::kPower;
  info.kind = "power";
  info.t0 = t0;
  info.r0 = r0;
  info.constants = {{"lambda", lambda},
                    {"lambda_spread", lam.spread()},
                    {"rho_E_over_D_at_base", rho0},
                    {"rho_D_over_E_at_base", 1.0 / rho0},
                    {"orientation", sigma},
                    {"max_curl", curl}};
  info.tables.push_back(tabulate("log_theta", pr.domain(), log_theta));
  auto model = std::make_shared<PowerModel>(coefficient_exprs(fields), rho, log_theta, lambda, sigma);
  return finish(model, std::move(info), pr);
}

Construction build_exponential(const ConnectionProfile& pr, const ModelOptions& opt) {
  const ConnectionFields fields(pr);
  const auto& d = fields.derived_exprs();
  const auto [t0, r0] = base_point(pr, opt);
  const auto pts = grid_points(pr.domain(), opt.grid);
  const Spread mu_s = ratio_spread(d.F, d.E, pts);
  const Expr mu = d.F / d.E;
  const double log_residual = mu_log_derivative_residual(pr, opt.grid);
  const LineIntegral log_phi = LineIntegral::from_exprs(d.M + 2.0 * pr.k(4) * d.b * mu,
                                                        d.N + 2.0 * pr.k(6) * d.b * mu, t0, r0);
  const double curl = log_phi.require_closed(pts, kCurlTol);

  ConstructionInfo info;
  info.label = label::kExponential;
  info.kind = "exponential";
  info.t0 = t0;
  info.r0 = r0;
  info.constants = {{"mu_at_base", mu.eval(t0, r0)},
                    {"mu_spread", mu_s.spread()},
                    {"mu_log_derivative_residual", log_residual},
                    {"max_curl", curl}};
  if (mu_s.spread() > kConstancyTol * (1.0 + std::fabs(mu_s.mean)))
    info.warnings.push_back("mu = F/E varies on the grid; it follows d ln mu = -(M~ dt + N~ dr)");
  info.tables.push_back(tabulate("log_phi", pr.domain(), log_phi));
  auto model = std::make_shared<ExponentialModel>(coefficient_exprs(fields), mu, log_phi);
  return finish(model, std::move(info), pr);
}

Construction build_wsector(const ConnectionProfile& pr, const ModelOptions& opt) {
  const ConnectionFields fields(pr);
  const auto& d = fields.derived_exprs();
  const auto [t0, r0] = base_point(pr, opt);
  const auto pts = grid_points(pr.domain(), opt.grid);
  const std::string text = opt.free_function.empty() ? kDefaultXiW : opt.free_function;
  const Expr xi = parse(text, VarSet{"q"});
  const LineIntegral f = LineIntegral::from_exprs(d.M, d.N, t0, r0);
  const double curl = f.require_closed(pts, kCurlTol);

  ConstructionInfo info;
  info.label = label::kWsector;
  info.kind = "wsector";
  info.free_function = text;
  info.t0 = t0;
  info.r0 = r0;
  info.constants = {{"max_curl", curl},
                    {"max_abs_b", grid_max_abs(d.b, pts)},
                    {"max_abs_c", grid_max_abs(d.c, pts)}};
  info.tables.push_back(tabulate("f", pr.domain(), f));
  auto model = std::make_shared<WsectorModel>(d.a, f, xi);
  return finish(model, std::move(info), pr);
}

Construction build_transport(const ConnectionProfile& pr, const ModelOptions& opt) {
  const auto [t0, r0] = base_point(pr, opt);
  const bool free2d = delta_w_trivial(pr, opt.grid);
  ConstructionInfo info;
  info.label = free2d ? label::kFree2D : label::kFlatBracket;
  info.kind = "transport";
  info.t0 = t0;
  info.r0 = r0;

  SeedFn seed;
  if (free2d) {
    const std::string text = opt.free_function.empty() ? kDefaultSeed : opt.free_function;
    const Expr L0 = parse(text, VarSet{"dt", "dr", "w"});
    info.free_function = text;
    seed = [L0](const XJet& dt, const XJet& dr, const XJet& w) {
      const std::array<XJet, 3> args{dt, dr, w};
      return L0.evaluate<XJet>(args);
    };
  } else {
    const std::string text = opt.free_function.empty() ? kDefaultXiFlat : opt.free_function;
    const Expr Xi = parse(text, VarSet{"z"});
    const DerivedCoeffs dc = ConnectionFields(pr).derived(t0, r0);
    info.free_function = text;
    info.constants = {{"a_at_base", dc.a}, {"b_at_base", dc.b}, {"c_at_base", dc.c}};
    seed = [Xi, dc](const XJet& dt, const XJet& dr, const XJet& w) {
      const XJet u = dt - dc.a * dr;
      if (base_value(u) == 0.0) throw InadmissiblePoint("u vanishes at the base point");
      const XJet u2 = u * u;
      const XJet v = dc.c * dr * dr + 2.0 * dc.b * dt * dr - w * w;
      return u2 * eval_unary(Xi, v / u2);
    };
  }

  const Domain& d = pr.domain();
  double worst = 0.0;
  for (double t : {d.t_min, d.t_max})
    for (double r : {d.r_min, d.r_max}) worst = std::max(worst, transport_discrepancy(pr, t0, r0, t, r));
  info.constants.emplace_back("path_swap_discrepancy", worst);
  if (worst > kPathSwapTol)
    throw ConstructionError("parallel transport depends on the path (discrepancy " +
                            std::to_string(worst) + "); the brackets are not flat");
  auto model = std::make_shared<TransportModel>(pr, t0, r0, std::move(seed));
  return finish(model, std::move(info), pr);
}

Construction build_onevar(const ConnectionProfile& pr, const ModelOptions& opt) {
  auto fields = std::make_shared<const OneVarFields>(pr);
  const auto [t0, r0] = base_point(pr, opt);
  const double p0 = opt.p0.value_or(onevar_default_p0(pr, opt.grid));
  const std::string text = opt.free_function.empty() ? kDefaultXiOneVar : opt.free_function;
  const Expr xi = parse(text, VarSet{"q"});
  const Expr curl_expr = diff(fields->K_local, 1) - diff(fields->T_local, 0);
  LineIntegral phi(
      [fields, p0](double t, double r) { return OneVarFields::at(fields->K_local, t, r, p0); },
      [fields, p0](double t, double r) { return OneVarFields::at(fields->T_local, t, r, p0); }, t0,
      r0, [curl_expr, p0](double t, double r) { return OneVarFields::at(curl_expr, t, r, p0); });
  const auto pts = grid_points(pr.domain(), opt.grid);
  for (const auto& pt : pts)
    if (!fields->clear(pt.t, pt.r, p0, p0))
      throw ConstructionError("integrand denominator vanishes at the base slope");
  const double curl = phi.require_closed(pts, kCurlTol);

  ConstructionInfo info;
  info.label = label::kOneVar;
  info.kind = "onevar";
  info.free_function = text;
  info.t0 = t0;
  info.r0 = r0;
  info.constants = {{"p0", p0}, {"max_curl", curl}};
  info.tables.push_back(tabulate("phi", pr.domain(), phi));
  auto model = std::make_shared<OneVarModel>(fields, p0, phi, xi);
  return finish(model, std::move(info), pr);
}

Construction construct(const ConnectionProfile& pr, const ClassificationReport& rep,
                       const ModelOptions& opt) {
  const ConnectionProfile target = rep.mirrored ? pr.swap_roles() : pr;
  ModelOptions o = opt;
  if (rep.mirrored) std::swap(o.t0, o.r0);
  const std::string& l = rep.base_label;
  Construction c;
  if (l == label::kPower)
    c = build_power(target, o);
  else if (l == label::kExponential)
    c = build_exponential(target, o);
  else if (l == label::kWsector)
    c = build_wsector(target, o);
  else if (l == label::kFlatBracket || l == label::kFree2D)
    c = build_transport(target, o);
  else if (l == label::kOneVar)
    c = build_onevar(target, o);
  else
    throw ConstructionError("label " + rep.label + " admits no non-Riemannian Berwald function");
  if (rep.mirrored) {
    c.model = mirror(c.model);
    std::swap(c.info.t0, c.info.r0);
  }
  c.info.label = rep.label;
  return c;
}

}  // namespace berwald
