#pragma once

// First-order dual numbers over an arbitrary scalar type. Used to carry
// position derivatives (t, r, theta, phi) alongside velocity jets.

#include <array>
#include <cmath>

#include "berwald/jet.hpp"

namespace berwald {

using std::abs;
using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sinh;
using std::sqrt;
using std::tan;
using std::tanh;

inline double base_value(double x) { return x; }
inline double constant_like(double, double c) { return c; }

template <class S, int K>
struct Dual {
  S v{};
  std::array<S, K> d{};

  static Dual constant(const S& value) {
    Dual out;
    out.v = value;
    for (auto& e : out.d) e = constant_like(value, 0.0);
    return out;
  }

  Dual operator-() const {
    Dual out;
    out.v = -v;
    for (int i = 0; i < K; ++i) out.d[i] = -d[i];
    return out;
  }
  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < K; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < K; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual out;
    out.v = a.v * b.v;
    for (int i = 0; i < K; ++i) out.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return out;
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const S inv = 1.0 / b.v;
    Dual out;
    out.v = a.v * inv;
    for (int i = 0; i < K; ++i) out.d[i] = (a.d[i] - out.v * b.d[i]) * inv;
    return out;
  }

  friend Dual operator+(Dual a, double s) {
    a.v = a.v + s;
    return a;
  }
  friend Dual operator+(double s, Dual a) { return a + s; }
  friend Dual operator-(Dual a, double s) { return a + (-s); }
  friend Dual operator-(double s, const Dual& a) { return (-a) + s; }
  friend Dual operator*(Dual a, double s) {
    a.v = a.v * s;
    for (auto& e : a.d) e = e * s;
    return a;
  }
  friend Dual operator*(double s, Dual a) { return a * s; }
  friend Dual operator/(const Dual& a, double s) { return a * (1.0 / s); }
  friend Dual operator/(double s, const Dual& b) { return constant_like(b, s) / b; }
};

template <class S, int K>
double base_value(const Dual<S, K>& x) {
  return base_value(x.v);
}

template <class S, int K>
Dual<S, K> constant_like(const Dual<S, K>& proto, double c) {
  return Dual<S, K>::constant(constant_like(proto.v, c));
}

namespace detail {

template <class S, int K>
Dual<S, K> chain(const S& value, const S& slope, const Dual<S, K>& x) {
  Dual<S, K> out;
  out.v = value;
  for (int i = 0; i < K; ++i) out.d[i] = slope * x.d[i];
  return out;
}

}  // namespace detail

template <class S, int K>
Dual<S, K> exp(const Dual<S, K>& x) {
  const S e = exp(x.v);
  return detail::chain(e, e, x);
}

template <class S, int K>
Dual<S, K> log(const Dual<S, K>& x) {
  return detail::chain(log(x.v), S(1.0 / x.v), x);
}

template <class S, int K>
Dual<S, K> sqrt(const Dual<S, K>& x) {
  const S s = sqrt(x.v);
  return detail::chain(s, S(0.5 / s), x);
}

template <class S, int K>
Dual<S, K> pow(const Dual<S, K>& x, double c) {
  if (c == 0.0) return constant_like(x, 1.0);
  return detail::chain(pow(x.v, c), S(c * pow(x.v, c - 1.0)), x);
}

template <class S, int K>
Dual<S, K> sin(const Dual<S, K>& x) {
  return detail::chain(sin(x.v), cos(x.v), x);
}

template <class S, int K>
Dual<S, K> cos(const Dual<S, K>& x) {
  return detail::chain(cos(x.v), S(-sin(x.v)), x);
}

template <class S, int K>
Dual<S, K> tan(const Dual<S, K>& x) {
  const S tv = tan(x.v);
  return detail::chain(tv, S(1.0 + tv * tv), x);
}

template <class S, int K>
Dual<S, K> sinh(const Dual<S, K>& x) {
  return detail::chain(sinh(x.v), cosh(x.v), x);
}

template <class S, int K>
Dual<S, K> cosh(const Dual<S, K>& x) {
  return detail::chain(cosh(x.v), sinh(x.v), x);
}

template <class S, int K>
Dual<S, K> tanh(const Dual<S, K>& x) {
  const S tv = tanh(x.v);
  return detail::chain(tv, S(1.0 - tv * tv), x);
}

template <class S, int K>
Dual<S, K> abs(const Dual<S, K>& x) {
  return base_value(x) < 0.0 ? -x : x;
}

using XJet = Dual<VJet, 4>;

}  // namespace berwald
