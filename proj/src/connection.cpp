#include "berwald/connection.hpp"

#include <cmath>
#include <limits>

#include "berwald/errors.hpp"

namespace berwald {

namespace {

constexpr int kT = 0, kR = 1;

template <class T>
struct CapitalSet {
  T A, B, C, D, E, F;
};

template <class T>
CapitalSet<T> capital_set(const T& a, const T& b, const T& c, const T& x1, const T& x2,
                          const T& x3, const T& x4, const T& x5) {
  const T ab_c = a * b + c;
  return {b * (a * x1 + x2) + ab_c * (a * x3 + x4) - x5 * (2.0 * a * b + c),
          a * (a * x3 + x4) - (a * x1 + x2),
          ab_c * x3 + b * (a * x3 + x4) + b * (x1 - 2.0 * x5),
          a * x3 - x1 + x5,
          b * x3,
          a * x3 - x1};
}

}  // namespace

ConnectionProfile::ConnectionProfile() : ConnectionProfile(std::array<Expr, 12>{}, Domain{}) {}

ConnectionProfile::ConnectionProfile(std::array<Expr, 12> k, Domain domain)
    : k_(std::move(k)), domain_(domain) {
  if (!(domain_.t_max > domain_.t_min) || !(domain_.r_max > domain_.r_min))
    throw ConfigError("domain ranges must be nondegenerate");
  for (int i = 0; i < 12; ++i) {
    if (k_[i].max_slot() > kR) throw ConfigError("connection coefficients depend only on t and r");
    k_t_[i] = diff(k_[i], kT);
    k_r_[i] = diff(k_[i], kR);
  }
}

ConnectionProfile ConnectionProfile::parse(const std::array<std::string, 12>& k, Domain domain) {
  std::array<Expr, 12> e;
  for (int i = 0; i < 12; ++i) e[i] = k[i].empty() ? Expr::constant(0.0) : berwald::parse(k[i]);
  return ConnectionProfile(std::move(e), domain);
}

std::array<double, 12> ConnectionProfile::values(double t, double r) const {
  std::array<double, 12> out;
  for (int i = 0; i < 12; ++i) out[i] = k_[i].eval(t, r);
  return out;
}

ConnectionProfile ConnectionProfile::swap_roles() const {
  // Position i of the result takes the field at index kSource[i].
  static constexpr std::array<int, 12> kSource{4, 5, 3, 2, 0, 1, 9, 8, 7, 6, 11, 10};
  const std::vector<int> swap_tr{kR, kT};
  std::array<Expr, 12> out;
  for (int i = 0; i < 12; ++i) out[i] = remap(k_[kSource[i]], swap_tr, coordinate_vars());
  return ConnectionProfile(std::move(out), domain_.transposed());
}

Christoffel christoffel(const ConnectionProfile& pr, double t, double r, double th) {
  const auto k = pr.values(t, r);
  auto K = [&](int i) { return k[i - 1]; };
  const double s = std::sin(th), c = std::cos(th);
  if (std::fabs(s) < 1e-300) throw DomainError("Christoffel symbols undefined at the pole");
  Christoffel g{};
  auto set = [&](int a, int b, int cc, double v) {
    g[a][b][cc] = v;
    g[a][cc][b] = v;
  };
  constexpr int T = 0, R = 1, TH = 2, PH = 3;
  set(T, T, T, K(1));
  set(T, T, R, K(2));
  set(T, R, R, K(3));
  set(T, TH, TH, K(7));
  set(T, PH, PH, K(7) * s * s);
  set(R, T, T, K(4));
  set(R, T, R, K(6));
  set(R, R, R, K(5));
  set(R, TH, TH, K(10));
  set(R, PH, PH, K(10) * s * s);
  set(TH, T, TH, K(8));
  set(TH, R, TH, K(9));
  set(TH, T, PH, -K(11) * s);
  set(TH, R, PH, -K(12) * s);
  set(TH, PH, PH, -s * c);
  set(PH, T, TH, K(11) / s);
  set(PH, R, TH, K(12) / s);
  set(PH, T, PH, K(8));
  set(PH, R, PH, K(9));
  set(PH, TH, PH, c / s);
  return g;
}

Matrix4 nonlinear_from_profile(const ConnectionProfile& pr, const SamplePoint& p) {
  if (std::fabs(std::sin(p.th)) < 1e-6) throw DomainError("sample too close to the pole");
  const Christoffel g = christoffel(pr, p.t, p.r, p.th);
  const auto v = p.v();
  Matrix4 n{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double acc = 0.0;
      for (int c = 0; c < 4; ++c) acc += g[a][b][c] * v[c];
      n[a][b] = acc;
    }
  return n;
}

ConnectionFields::ConnectionFields(const ConnectionProfile& pr) : profile_(pr) {
  auto k = [&](int i) -> const Expr& { return pr.k(i); };
  auto kt = [&](int i) -> const Expr& { return pr.k_t(i); };
  auto kr = [&](int i) -> const Expr& { return pr.k_r(i); };

  a_[1] = kr(1) - kt(2) + k(3) * k(4) - k(2) * k(6);
  a_[2] = kr(2) - kt(3) + k(2) * k(2) + k(3) * k(6) - k(1) * k(3) - k(2) * k(5);
  a_[3] = kr(4) - kt(6) + k(1) * k(6) + k(4) * k(5) - k(2) * k(4) - k(6) * k(6);
  a_[4] = kr(6) - kt(5) + k(2) * k(6) - k(3) * k(4);
  a_[5] = kr(8) - kt(9);
  a_[6] = -kt(7) + k(7) * k(8) - k(1) * k(7) - k(2) * k(10);
  a_[7] = -kt(10) + k(8) * k(10) - k(4) * k(7) - k(6) * k(10);
  a_[8] = -kt(8) + k(1) * k(8) + k(4) * k(9) - k(8) * k(8);
  a_[9] = -kt(9) + k(2) * k(8) + k(6) * k(9) - k(8) * k(9);
  a_[10] = -kr(7) + k(7) * k(9) - k(2) * k(7) - k(3) * k(10);
  a_[11] = -kr(10) + k(9) * k(10) - k(6) * k(7) - k(5) * k(10);
  a_[12] = -kr(8) + k(2) * k(8) + k(6) * k(9) - k(8) * k(9);
  a_[13] = -kr(9) + k(3) * k(8) + k(5) * k(9) - k(9) * k(9);
  a_[14] = 1.0 + k(7) * k(8) + k(9) * k(10);

  auto dt = [](const Expr& e) { return diff(e, kT); };
  auto dr = [](const Expr& e) { return diff(e, kR); };
  A_[1] = dt(a_[1]) + a_[3] * k(2) - a_[2] * k(4);
  A_[2] = dt(a_[2]) + a_[2] * k(1) - a_[1] * k(2) + a_[4] * k(2) - a_[2] * k(6);
  A_[3] = dt(a_[3]) - a_[3] * k(1) + a_[1] * k(4) - a_[4] * k(4) + a_[3] * k(6);
  A_[4] = dt(a_[4]) + a_[2] * k(4) - a_[3] * k(2);
  A_[5] = dt(a_[5]);
  B_[1] = dr(a_[1]) + a_[3] * k(3) - a_[2] * k(6);
  B_[2] = dr(a_[2]) + a_[2] * k(2) - a_[1] * k(3) + a_[4] * k(3) - a_[2] * k(5);
  B_[3] = dr(a_[3]) - a_[3] * k(2) + a_[1] * k(6) - a_[4] * k(6) + a_[3] * k(5);
  B_[4] = dr(a_[4]) + a_[2] * k(6) - a_[3] * k(3);
  B_[5] = dr(a_[5]);

  Derived& d = derived_;
  d.a = k(7) / k(10);
  d.b = k(8) / k(10);
  d.c = (k(9) * k(10) - k(7) * k(8)) / pow(k(10), 2.0);
  const auto caps = capital_set<Expr>(d.a, d.b, d.c, a_[1], a_[2], a_[3], a_[4], a_[5]);
  d.A = caps.A;
  d.B = caps.B;
  d.C = caps.C;
  d.D = caps.D;
  d.E = caps.E;
  d.F = caps.F;
  d.M = 2.0 * (k(1) - k(4) * d.a);
  d.M_tilde = d.M - 2.0 * k(8);
  d.N = 2.0 * (k(2) - k(6) * d.a);
  d.N_tilde = d.N - 2.0 * k(9);
}

CurvatureTable ConnectionFields::curvature(double t, double r) const {
  CurvatureTable out;
  for (int i = 1; i <= 14; ++i) out.a[i] = a_[i].eval(t, r);
  for (int i = 1; i <= 5; ++i) {
    out.A[i] = A_[i].eval(t, r);
    out.B[i] = B_[i].eval(t, r);
  }
  return out;
}

Capitals capitals(double a, double b, double c, const std::array<double, 6>& x) {
  const auto s = capital_set<double>(a, b, c, x[1], x[2], x[3], x[4], x[5]);
  return {s.A, s.B, s.C, s.D, s.E, s.F};
}

DerivedCoeffs ConnectionFields::derived(const CurvatureTable& table,
                                        const std::array<double, 12>& k) const {
  const double k10 = k[9];
  if (k10 == 0.0) throw MirroredCase("k10 vanishes; the derived coefficients need the mirrored case");
  DerivedCoeffs d;
  d.a = k[6] / k10;
  d.b = k[7] / k10;
  d.c = (k[8] * k10 - k[6] * k[7]) / (k10 * k10);
  std::array<double, 6> base{};
  for (int i = 1; i <= 5; ++i) base[i] = table.a[i];
  d.base = capitals(d.a, d.b, d.c, base);
  d.bracket_t = capitals(d.a, d.b, d.c, table.A);
  d.bracket_r = capitals(d.a, d.b, d.c, table.B);
  d.M = 2.0 * (k[0] - k[3] * d.a);
  d.M_tilde = d.M - 2.0 * k[7];
  d.N = 2.0 * (k[1] - k[5] * d.a);
  d.N_tilde = d.N - 2.0 * k[8];
  return d;
}

DerivedCoeffs ConnectionFields::derived(double t, double r) const {
  return derived(curvature(t, r), profile_.values(t, r));
}

std::vector<std::pair<std::string, double>> ConnectionFields::tabulate(double t, double r) const {
  std::vector<std::pair<std::string, double>> out;
  const CurvatureTable ct = curvature(t, r);
  for (int i = 1; i <= 14; ++i) out.emplace_back("a" + std::to_string(i), ct.a[i]);
  for (int i = 1; i <= 5; ++i) out.emplace_back("A" + std::to_string(i), ct.A[i]);
  for (int i = 1; i <= 5; ++i) out.emplace_back("B" + std::to_string(i), ct.B[i]);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  DerivedCoeffs d;
  bool ok = true;
  try {
    d = derived(ct, profile_.values(t, r));
  } catch (const MirroredCase&) {
    ok = false;
  }
  auto put = [&](const char* name, double v) { out.emplace_back(name, ok ? v : nan); };
  put("a", d.a);
  put("b", d.b);
  put("c", d.c);
  put("A", d.base.A);
  put("B", d.base.B);
  put("C", d.base.C);
  put("D", d.base.D);
  put("E", d.base.E);
  put("F", d.base.F);
  put("M", d.M);
  put("M_tilde", d.M_tilde);
  put("N", d.N);
  put("N_tilde", d.N_tilde);
  return out;
}

UVZ uvz(const SamplePoint& p, const DerivedCoeffs& dc) {
  const double w = p.w();
  UVZ out;
  out.u = p.dt - dc.a * p.dr;
  out.v = dc.c * p.dr * p.dr + 2.0 * dc.b * p.dt * p.dr - w * w;
  out.z_defined = out.u != 0.0;
  out.z = out.z_defined ? out.v / (out.u * out.u) : 0.0;
  return out;
}

}  // namespace berwald
