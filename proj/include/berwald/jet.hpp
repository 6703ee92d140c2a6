#pragma once

// Truncated multivariate Taylor arithmetic. Coefficients are stored in Taylor
// normalization (partial / alpha!); partial() converts back.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "berwald/errors.hpp"

namespace berwald {

namespace detail {

constexpr int binomial(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

constexpr int ipow_int(int b, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace detail

template <int N, int M>
class Jet {
  static_assert(N >= 1 && M >= 0, "bad jet shape");

 public:
  static constexpr int kVars = N;
  static constexpr int kMaxOrder = M;
  using Index = std::array<int, N>;

  static constexpr int size(int order) { return detail::binomial(N + order, order); }
  static constexpr int kCapacity = size(M);

  Jet() = default;

  static Jet constant(double v, int order) {
    check_order(order, 0);
    Jet j;
    j.order_ = order;
    j.c_[0] = v;
    return j;
  }

  static Jet variable(double v, int slot, int order) {
    Jet j = constant(v, order);
    if (order >= 1) j.c_[tables().raise[slot][0]] = 1.0;
    return j;
  }

  static std::array<Jet, N> seed(const std::array<double, N>& values, int order) {
    check_order(order, 1);
    std::array<Jet, N> out;
    for (int i = 0; i < N; ++i) out[i] = variable(values[i], i, order);
    return out;
  }

  int order() const { return order_; }
  double base() const { return c_[0]; }
  int terms() const { return size(order_); }

  double coefficient(const Index& alpha) const {
    const int k = index_of(alpha);
    return k < 0 ? 0.0 : c_[k];
  }
  double coefficient_at(int k) const { return c_[k]; }
  void set_coefficient_at(int k, double v) { c_[k] = v; }

  double partial(const Index& alpha) const {
    int deg = 0;
    for (int a : alpha) {
      if (a < 0) throw std::invalid_argument("negative multi-index");
      deg += a;
    }
    if (deg > order_)
      throw std::out_of_range("multi-index order " + std::to_string(deg) +
                              " exceeds jet order " + std::to_string(order_));
    const int k = index_of(alpha);
    return c_[k] * tables().factorial[k];
  }

  static const Index& multi_index(int k) { return tables().alpha[k]; }
  static int degree(int k) { return tables().degree[k]; }
  static int index_of(const Index& alpha) { return tables().lookup(alpha); }

  // Velocity derivative as a jet of one lower order.
  Jet derivative(int slot) const {
    Jet out;
    out.order_ = std::max(order_ - 1, 0);
    if (order_ == 0) return out;
    const auto& tb = tables();
    const int n = size(order_ - 1);
    for (int k = 0; k < n; ++k) {
      const int up = tb.raise[slot][k];
      out.c_[k] = (tb.alpha[k][slot] + 1) * c_[up];
    }
    return out;
  }

  Jet truncated(int order) const {
    check_order(order, 0);
    Jet out = *this;
    if (order >= order_) return out;
    out.order_ = order;
    std::fill(out.c_.begin() + size(order), out.c_.end(), 0.0);
    return out;
  }

  Jet operator-() const {
    Jet out = *this;
    for (int k = 0; k < terms(); ++k) out.c_[k] = -c_[k];
    return out;
  }

  Jet& operator+=(const Jet& o) {
    reduce_order(o.order_);
    for (int k = 0; k < terms(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    reduce_order(o.order_);
    for (int k = 0; k < terms(); ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (int k = 0; k < terms(); ++k) c_[k] *= s;
    return *this;
  }
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    *this = *this / o;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a += -s; }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet out;
    out.order_ = std::min(a.order_, b.order_);
    const auto& tb = tables();
    const int end = tb.products_end[out.order_];
    for (int p = 0; p < end; ++p) {
      const auto& ijk = tb.products[p];
      out.c_[ijk[2]] += a.c_[ijk[0]] * b.c_[ijk[1]];
    }
    return out;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
  friend Jet operator/(double s, const Jet& b) { return s * reciprocal(b); }
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }

  // Univariate composition: derivs[k] = f^(k)(base of x).
  static Jet compose(const Jet& x, const std::array<double, M + 1>& derivs) {
    Jet h = x;
    h.c_[0] = 0.0;
    Jet out = constant(derivs[0], x.order_);
    if (x.order_ == 0) return out;
    Jet power = h;
    double factorial = 1.0;
    for (int k = 1; k <= x.order_; ++k) {
      factorial *= k;
      const double w = derivs[k] / factorial;
      for (int i = 0; i < out.terms(); ++i) out.c_[i] += w * power.c_[i];
      if (k < x.order_) power = power * h;
    }
    return out;
  }

  friend Jet reciprocal(const Jet& x) {
    const double x0 = x.base();
    if (x0 == 0.0) throw DomainError("division by a jet with zero base value");
    std::array<double, M + 1> d{};
    double f = 1.0 / x0;
    for (int k = 0; k <= M; ++k) {
      d[k] = f;
      f *= -(k + 1) / x0;
    }
    return compose(x, d);
  }

 private:
  struct Tables {
    std::array<Index, kCapacity> alpha{};
    std::array<int, kCapacity> degree{};
    std::array<double, kCapacity> factorial{};
    std::array<std::array<int, kCapacity>, N> raise{};
    std::vector<std::array<int, 3>> products;
    std::array<int, M + 1> products_end{};
    std::vector<int> code_to_index;

    static int encode(const Index& a) {
      int code = 0;
      for (int i = N - 1; i >= 0; --i) code = code * (M + 1) + a[i];
      return code;
    }
    int lookup(const Index& a) const {
      int deg = 0;
      for (int v : a) {
        if (v < 0) return -1;
        deg += v;
      }
      if (deg > M) return -1;
      return code_to_index[encode(a)];
    }

    Tables() {
      code_to_index.assign(detail::ipow_int(M + 1, N), -1);
      int k = 0;
      Index cur{};
      for (int d = 0; d <= M; ++d) enumerate(d, 0, cur, k);
      for (int i = 0; i < kCapacity; ++i) {
        double f = 1.0;
        for (int v : alpha[i])
          for (int m = 2; m <= v; ++m) f *= m;
        factorial[i] = f;
        for (int s = 0; s < N; ++s) {
          Index up = alpha[i];
          up[s] += 1;
          raise[s][i] = lookup(up);
        }
      }
      for (int i = 0; i < kCapacity; ++i)
        for (int j = 0; j < kCapacity; ++j) {
          if (degree[i] + degree[j] > M) continue;
          Index s{};
          for (int v = 0; v < N; ++v) s[v] = alpha[i][v] + alpha[j][v];
          products.push_back({i, j, lookup(s)});
        }
      std::stable_sort(products.begin(), products.end(),
                       [this](const auto& a, const auto& b) { return degree[a[2]] < degree[b[2]]; });
      for (int d = 0; d <= M; ++d)
        products_end[d] = static_cast<int>(
            std::count_if(products.begin(), products.end(),
                          [&](const auto& p) { return degree[p[2]] <= d; }));
    }

    void enumerate(int remaining, int slot, Index& cur, int& k) {
      if (slot == N - 1) {
        cur[slot] = remaining;
        alpha[k] = cur;
        int deg = 0;
        for (int v : cur) deg += v;
        degree[k] = deg;
        code_to_index[encode(cur)] = k;
        ++k;
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        cur[slot] = v;
        enumerate(remaining - v, slot + 1, cur, k);
      }
      cur[slot] = 0;
    }
  };

  static const Tables& tables() {
    static const Tables t;
    return t;
  }

  static void check_order(int order, int lowest) {
    if (order < lowest || order > M)
      throw std::out_of_range("jet order " + std::to_string(order) + " outside " +
                              std::to_string(lowest) + ".." + std::to_string(M));
  }

  void reduce_order(int other) {
    if (other < order_) {
      std::fill(c_.begin() + size(other), c_.begin() + size(order_), 0.0);
      order_ = other;
    }
  }

  int order_ = 0;
  std::array<double, kCapacity> c_{};
};

using VJet = Jet<4, 5>;

// Elementary functions on jets, each via its derivative sequence at the base point.

template <int N, int M>
Jet<N, M> exp(const Jet<N, M>& x) {
  std::array<double, M + 1> d;
  d.fill(std::exp(x.base()));
  return Jet<N, M>::compose(x, d);
}

template <int N, int M>
Jet<N, M> log(const Jet<N, M>& x) {
  const double x0 = x.base();
  if (!(x0 > 0.0)) throw DomainError("log of a jet with nonpositive base value");
  std::array<double, M + 1> d{};
  d[0] = std::log(x0);
  double f = 1.0 / x0;
  for (int k = 1; k <= M; ++k) {
    d[k] = f;
    f *= -k / x0;
  }
  return Jet<N, M>::compose(x, d);
}

template <int N, int M>
Jet<N, M> pow(const Jet<N, M>& x, double c) {
  const double x0 = x.base();
  const bool integral = c == std::floor(c) && std::fabs(c) <= 64;
  if (x0 == 0.0 && x.order() > 0 && !(integral && c >= 0))
    throw DomainError("power of a jet with zero base value");
  if (x0 < 0.0 && !integral) throw DomainError("non-integer power of a negative jet");
  std::array<double, M + 1> d{};
  double coef = 1.0;
  for (int k = 0; k <= M; ++k) {
    d[k] = coef == 0.0 ? 0.0 : coef * std::pow(x0, c - k);
    coef *= (c - k);
  }
  return Jet<N, M>::compose(x, d);
}

template <int N, int M>
Jet<N, M> sqrt(const Jet<N, M>& x) {
  if (x.base() < 0.0 || (x.base() == 0.0 && x.order() > 0))
    throw DomainError("sqrt of a jet with nonpositive base value");
  return pow(x, 0.5);
}

template <int N, int M>
Jet<N, M> sin(const Jet<N, M>& x) {
  const double s = std::sin(x.base()), c = std::cos(x.base());
  const double cycle[4] = {s, c, -s, -c};
  std::array<double, M + 1> d;
  for (int k = 0; k <= M; ++k) d[k] = cycle[k % 4];
  return Jet<N, M>::compose(x, d);
}

template <int N, int M>
Jet<N, M> cos(const Jet<N, M>& x) {
  const double s = std::sin(x.base()), c = std::cos(x.base());
  const double cycle[4] = {c, -s, -c, s};
  std::array<double, M + 1> d;
  for (int k = 0; k <= M; ++k) d[k] = cycle[k % 4];
  return Jet<N, M>::compose(x, d);
}

template <int N, int M>
Jet<N, M> tan(const Jet<N, M>& x) {
  return sin(x) / cos(x);
}

template <int N, int M>
Jet<N, M> sinh(const Jet<N, M>& x) {
  const double s = std::sinh(x.base()), c = std::cosh(x.base());
  std::array<double, M + 1> d;
  for (int k = 0; k <= M; ++k) d[k] = k % 2 == 0 ? s : c;
  return Jet<N, M>::compose(x, d);
}

template <int N, int M>
Jet<N, M> cosh(const Jet<N, M>& x) {
  const double s = std::sinh(x.base()), c = std::cosh(x.base());
  std::array<double, M + 1> d;
  for (int k = 0; k <= M; ++k) d[k] = k % 2 == 0 ? c : s;
  return Jet<N, M>::compose(x, d);
}

template <int N, int M>
Jet<N, M> tanh(const Jet<N, M>& x) {
  return sinh(x) / cosh(x);
}

template <int N, int M>
Jet<N, M> abs(const Jet<N, M>& x) {
  if (x.base() == 0.0 && x.order() > 0) throw DomainError("abs of a jet at its kink");
  return x.base() < 0.0 ? -x : x;
}

template <int N, int M>
double base_value(const Jet<N, M>& x) {
  return x.base();
}

template <int N, int M>
Jet<N, M> constant_like(const Jet<N, M>& proto, double c) {
  return Jet<N, M>::constant(c, proto.order());
}

// Solves A x = b for jet-valued A, b by Gaussian elimination with partial pivoting
// on base values.
template <class J, std::size_t n>
std::array<J, n> solve(std::array<std::array<J, n>, n> a, std::array<J, n> b) {
  double scale = 0.0;
  for (const auto& row : a)
    for (const auto& e : row) scale = std::max(scale, std::fabs(e.base()));
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col].base()) > std::fabs(a[pivot][col].base())) pivot = r;
    if (std::fabs(a[pivot][col].base()) <= 1e-14 * scale)
      throw SingularMetric("singular jet matrix in linear solve");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    const J inv = reciprocal(a[col][col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const J f = a[r][col] * inv;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<J, n> x;
  for (std::size_t i = n; i-- > 0;) {
    J acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

}  // namespace berwald
