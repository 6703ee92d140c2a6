#include "berwald/finsler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "berwald/errors.hpp"

namespace berwald {

namespace {

constexpr double kPoleSin = 1e-6;
constexpr double kSingularRel = 1e-12;
constexpr double kFdStepRel = 1e-5;
constexpr double kAngleStep = 1e-3;

XJet position(double value, int direction, int order) {
  XJet x = XJet::constant(VJet::constant(value, order));
  x.d[direction] = VJet::constant(1.0, order);
  return x;
}

XJet velocity(double value, int slot, int order) {
  return XJet::constant(VJet::variable(value, slot, order));
}

bool references(const Expr& e, int slot) {
  switch (e.kind()) {
    case Expr::Kind::Constant: return false;
    case Expr::Kind::Variable: return e.slot() == slot;
    case Expr::Kind::Negate:
    case Expr::Kind::Call: return references(e.left(), slot);
    default: return references(e.left(), slot) || references(e.right(), slot);
  }
}

template <class F>
VJet richardson_jet(const F& f, double x, double h) {
  auto central = [&](double step) { return (f(x + step) - f(x - step)) * (0.5 / step); };
  return (central(0.5 * h) * 4.0 - central(h)) * (1.0 / 3.0);
}

double richardson(const std::function<double(double)>& f, double x, double h) {
  auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

}  // namespace

PointJets PointJets::make(const SamplePoint& p, int order, bool with_w) {
  PointJets in;
  in.order = order;
  in.t = position(p.t, kDirT, order);
  in.r = position(p.r, kDirR, order);
  in.th = position(p.th, kDirTheta, order);
  in.ph = position(p.ph, kDirPhi, order);
  in.dt = velocity(p.dt, 0, order);
  in.dr = velocity(p.dr, 1, order);
  in.dth = velocity(p.dth, 2, order);
  in.dph = velocity(p.dph, 3, order);
  if (with_w) {
    const XJet s = sin(in.th);
    const XJet w2 = in.dth * in.dth + s * s * in.dph * in.dph;
    if (!(base_value(w2) > 0.0)) throw InadmissiblePoint("w vanishes at the sample");
    in.w = sqrt(w2);
  } else {
    in.w = XJet::constant(VJet::constant(p.w(), order));
  }
  return in;
}

XJet lift_field(const PointJets& in, double value, double d_t, double d_r) {
  XJet out = XJet::constant(VJet::constant(value, in.order));
  for (int c = 0; c < 4; ++c)
    out.d[c] = VJet::constant(d_t * in.t.d[c].base() + d_r * in.r.d[c].base(), in.order);
  return out;
}

bool FinslerModel::admissible(const SamplePoint& p) const {
  if (!(p.speed() > 0.0)) return false;
  if (needs_w() && !(p.w() > 0.0)) return false;
  try {
    const XJet v = evaluate(PointJets::make(p, 0, needs_w()));
    return std::isfinite(base_value(v));
  } catch (const std::runtime_error&) {
    return false;
  }
}

// ---------------------------------------------------------------------------

const VarSet& ExprModel::vars() {
  static const VarSet v{"t", "r", "th", "ph", "dt", "dr", "dth", "dph", "w"};
  return v;
}

ExprModel::ExprModel(const std::string& text, bool position_channel, std::string tag)
    : expr_(parse(text, vars())),
      channel_(position_channel),
      uses_w_(references(expr_, 8)),
      tag_(std::move(tag)) {}

XJet ExprModel::evaluate(const PointJets& in) const {
  const std::array<XJet, 9> args{in.t, in.r, in.th, in.ph, in.dt, in.dr, in.dth, in.dph, in.w};
  return expr_.evaluate<XJet>(args);
}

bool ExprModel::admissible(const SamplePoint& p) const { return FinslerModel::admissible(p); }

// ---------------------------------------------------------------------------

LocalJets local_jets(const FinslerModel& m, const SamplePoint& p, int order) {
  if (std::fabs(std::sin(p.th)) < kPoleSin) throw DomainError("sample too close to the pole");
  if (!m.admissible(p)) throw InadmissiblePoint("sample outside the model's admissible cone");
  XJet value;
  try {
    value = m.evaluate(PointJets::make(p, order, m.needs_w()));
  } catch (const DomainError& e) {
    throw InadmissiblePoint(std::string("model evaluation failed: ") + e.what());
  }
  LocalJets out{value.v, {value.d[0], value.d[1], value.d[2], value.d[3]}};
  if (!m.has_position_channel()) {
    auto along = [&](bool in_t) {
      return [&, in_t](double x) {
        SamplePoint q = p;
        (in_t ? q.t : q.r) = x;
        return m.evaluate(PointJets::make(q, order, m.needs_w())).v;
      };
    };
    out.dx[0] = richardson_jet(along(true), p.t, kFdStepRel * std::max(1.0, std::fabs(p.t)));
    out.dx[1] = richardson_jet(along(false), p.r, kFdStepRel * std::max(1.0, std::fabs(p.r)));
  }
  return out;
}

VJet eval_L(const FinslerModel& m, const SamplePoint& p, int order) {
  return local_jets(m, p, order).L;
}

double eval_L_value(const FinslerModel& m, const SamplePoint& p) {
  if (!m.admissible(p)) throw InadmissiblePoint("sample outside the model's admissible cone");
  return base_value(m.evaluate(PointJets::make(p, 0, m.needs_w())));
}

double determinant(const Matrix4& a) {
  Matrix4 m = a;
  double det = 1.0;
  for (int c = 0; c < 4; ++c) {
    int piv = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    if (m[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (int r = c + 1; r < 4; ++r) {
      const double f = m[r][c] / m[c][c];
      for (int k = c; k < 4; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

namespace {

VJet::Index unit(int a) {
  VJet::Index e{};
  e[a] = 1;
  return e;
}

Matrix4 metric_from(const VJet& L) {
  Matrix4 g{};
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      VJet::Index e = unit(a);
      e[b] += 1;
      g[a][b] = g[b][a] = 0.5 * L.partial(e);
    }
  return g;
}

void require_nonsingular(const Matrix4& g) {
  double scale = 0.0;
  for (const auto& row : g)
    for (double e : row) scale = std::max(scale, std::fabs(e));
  const double det = determinant(g);
  if (!(std::fabs(det) >= kSingularRel * std::pow(scale, 4)) || scale == 0.0)
    throw SingularMetric("metric is singular at the sample (det " + std::to_string(det) + ")");
}

}  // namespace

MetricResult metric(const FinslerModel& m, const SamplePoint& p) {
  MetricResult out;
  out.g = metric_from(eval_L(m, p, 2));
  out.det = determinant(out.g);
  return out;
}

std::array<VJet, 4> spray_jets(const LocalJets& jets, const SamplePoint& p) {
  const int n = jets.L.order();
  if (n < 2) throw std::invalid_argument("spray needs jets of order at least 2");
  require_nonsingular(metric_from(jets.L));
  const auto v = p.v();
  std::array<VJet, 4> grad;
  for (int b = 0; b < 4; ++b) grad[b] = jets.L.derivative(b);
  std::array<std::array<VJet, 4>, 4> g;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) g[a][b] = grad[b].derivative(a) * 0.5;
  std::array<VJet, 4> rhs;
  for (int b = 0; b < 4; ++b) {
    VJet acc = jets.dx[b] * -1.0;
    for (int c = 0; c < 4; ++c) acc += VJet::variable(v[c], c, n) * jets.dx[c].derivative(b);
    rhs[b] = acc;
  }
  auto G = solve(g, rhs);
  for (auto& e : G) e *= 0.25;
  return G;
}

std::array<double, 4> spray(const FinslerModel& m, const SamplePoint& p) {
  const auto G = spray_jets(local_jets(m, p, 2), p);
  return {G[0].base(), G[1].base(), G[2].base(), G[3].base()};
}

Matrix4 nonlinear_connection(const FinslerModel& m, const SamplePoint& p) {
  const auto G = spray_jets(local_jets(m, p, 3), p);
  Matrix4 n{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) n[a][b] = G[a].partial(unit(b));
  return n;
}

double berwald_curvature_norm(const FinslerModel& m, const SamplePoint& p) {
  const auto G = spray_jets(local_jets(m, p, 5), p);
  double worst = 0.0;
  for (int k = 0; k < VJet::size(3); ++k) {
    if (VJet::degree(k) != 3) continue;
    for (int a = 0; a < 4; ++a) worst = std::max(worst, std::fabs(G[a].partial(VJet::multi_index(k))));
  }
  return worst;
}

std::array<double, 4> horizontal_residuals(const FinslerModel& m, const ConnectionProfile& pr,
                                           const SamplePoint& p) {
  const LocalJets jets = local_jets(m, p, 1);
  const Matrix4 n = nonlinear_from_profile(pr, p);
  std::array<double, 4> out{};
  for (int a = 0; a < 4; ++a) {
    double acc = jets.dx[a].base();
    for (int c = 0; c < 4; ++c) acc -= n[c][a] * jets.L.partial(unit(c));
    out[a] = acc;
  }
  return out;
}

double euler_residual(const FinslerModel& m, const SamplePoint& p) {
  const VJet L = eval_L(m, p, 1);
  const auto v = p.v();
  double acc = -2.0 * L.base();
  for (int a = 0; a < 4; ++a) acc += v[a] * L.partial(unit(a));
  return std::fabs(acc);
}

std::array<double, 3> so3_residuals(const FinslerModel& m, const SamplePoint& p) {
  const double s = std::sin(p.th), c = std::cos(p.th);
  if (std::fabs(s) < kPoleSin) throw DomainError("sample too close to the pole");
  const VJet L = eval_L(m, p, 1);
  auto value_at = [&](double th, double ph) {
    SamplePoint q = p;
    q.th = th;
    q.ph = ph;
    return base_value(m.evaluate(PointJets::make(q, 0, m.needs_w())));
  };
  const double d_th = richardson([&](double x) { return value_at(x, p.ph); }, p.th, kAngleStep);
  const double d_ph = richardson([&](double x) { return value_at(p.th, x); }, p.ph, kAngleStep);
  const double v_th = L.partial(unit(2)), v_ph = L.partial(unit(3));
  const double sp = std::sin(p.ph), cp = std::cos(p.ph);
  const double cot = c / s;
  const double x1 = sp * d_th + cot * cp * d_ph + p.dph * cp * v_th -
                    (p.dth * cp / (s * s) + p.dph * cot * sp) * v_ph;
  const double x2 = -cp * d_th + cot * sp * d_ph + p.dph * sp * v_th -
                    (p.dth * sp / (s * s) - p.dph * cot * cp) * v_ph;
  return {std::fabs(x1), std::fabs(x2), std::fabs(d_ph)};
}

double residual_scale(const FinslerModel& m, const SamplePoint& p) {
  const VJet L = eval_L(m, p, 1);
  double grad2 = 0.0;
  for (int a = 0; a < 4; ++a) grad2 += std::pow(L.partial(unit(a)), 2);
  return 1.0 + std::fabs(L.base()) + p.speed() * std::sqrt(grad2);
}

}  // namespace berwald
