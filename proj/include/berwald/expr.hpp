#pragma once

// Immutable arithmetic expression trees over named variable slots, with a
// recursive-descent parser, symbolic differentiation and generic evaluation
// over any scalar type (double, jets, duals).

#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "berwald/dual.hpp"
#include "berwald/errors.hpp"

namespace berwald {

using VarSet = std::vector<std::string>;

// Variables of connection coefficients and derived fields.
const VarSet& coordinate_vars();

enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh };

const char* func_name(Func f);

class Expr {
 public:
  enum class Kind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

  Expr();
  static Expr constant(double value);
  static Expr variable(int slot, std::string name);
  static Expr call(Func f, const Expr& arg);
  static Expr power(const Expr& base, const Expr& exponent);
  // Unfolded node constructors; the parser uses these to keep the literal shape.
  static Expr binary(Kind kind, const Expr& a, const Expr& b);
  static Expr unfolded_call(Func f, const Expr& arg);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  Expr operator-() const;

  Kind kind() const;
  double value() const;
  int slot() const;
  const std::string& name() const;
  Func func() const;
  const Expr& left() const;
  const Expr& right() const;

  bool is_constant() const { return kind() == Kind::Constant; }
  bool is_constant(double v) const { return is_constant() && value() == v; }
  // Largest variable slot referenced, or -1 for a closed expression.
  int max_slot() const;
  std::size_t node_count() const;

  double eval(double t, double r) const;
  double eval(std::span<const double> vars) const { return evaluate<double>(vars); }

  template <class T>
  T evaluate(std::span<const T> vars) const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  // A default-constructed Expr has no node and reads as the constant 0.
  const Node& node() const;
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  Kind kind = Kind::Constant;
  double value = 0.0;
  int slot = -1;
  std::string name;
  Func func = Func::Sin;
  Expr a, b;
};

inline const Expr::Node& Expr::node() const {
  static const Node zero{};
  return node_ ? *node_ : zero;
}

Expr parse(std::string_view text, const VarSet& vars = coordinate_vars());
Expr diff(const Expr& e, int slot);
// Rebinds variable slots: slot i becomes slot_map[i], renamed to names[slot_map[i]].
Expr remap(const Expr& e, const std::vector<int>& slot_map, const VarSet& names);
std::string to_string(const Expr& e);

inline Expr pow(const Expr& base, double exponent) {
  return Expr::power(base, Expr::constant(exponent));
}
inline Expr exp(const Expr& e) { return Expr::call(Func::Exp, e); }
inline Expr log(const Expr& e) { return Expr::call(Func::Log, e); }
inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
inline Expr operator-(double a, const Expr& b) { return Expr::constant(a) - b; }
inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
inline Expr operator/(const Expr& a, double b) { return a / Expr::constant(b); }
inline Expr operator/(double a, const Expr& b) { return Expr::constant(a) / b; }

namespace detail {

template <class T>
T integer_power(const T& x, long n) {
  if (n == 0) return constant_like(x, 1.0);
  const bool invert = n < 0;
  unsigned long m = static_cast<unsigned long>(invert ? -n : n);
  T result = constant_like(x, 1.0);
  T square = x;
  bool first = true;
  while (m > 0) {
    if (m & 1UL) {
      result = first ? square : result * square;
      first = false;
    }
    m >>= 1;
    if (m > 0) square = square * square;
  }
  return invert ? constant_like(x, 1.0) / result : result;
}

inline bool small_integer(double v) { return v == std::floor(v) && std::fabs(v) <= 32.0; }

}  // namespace detail

template <class T>
T Expr::evaluate(std::span<const T> vars) const {
  const Node& n = node();
  auto proto = [&]() -> T {
    if (vars.empty()) throw std::logic_error("generic evaluation needs at least one variable");
    return vars[0];
  };
  switch (n.kind) {
    case Kind::Constant:
      return constant_like(proto(), n.value);
    case Kind::Variable:
      if (n.slot < 0 || static_cast<std::size_t>(n.slot) >= vars.size())
        throw std::out_of_range("no value bound for variable " + n.name);
      return vars[n.slot];
    case Kind::Negate:
      return -n.a.evaluate(vars);
    case Kind::Add:
      return n.a.evaluate(vars) + n.b.evaluate(vars);
    case Kind::Sub:
      return n.a.evaluate(vars) - n.b.evaluate(vars);
    case Kind::Mul:
      return n.a.evaluate(vars) * n.b.evaluate(vars);
    case Kind::Div: {
      const T den = n.b.evaluate(vars);
      if (base_value(den) == 0.0) throw DomainError("division by zero in " + to_string(*this));
      return n.a.evaluate(vars) / den;
    }
    case Kind::Pow: {
      const T base = n.a.evaluate(vars);
      if (n.b.max_slot() < 0) {
        const std::array<double, 1> none{0.0};
        const double c = n.b.is_constant() ? n.b.value() : n.b.evaluate<double>(none);
        if (detail::small_integer(c)) {
          if (c < 0 && base_value(base) == 0.0)
            throw DomainError("division by zero in " + to_string(*this));
          return detail::integer_power(base, static_cast<long>(c));
        }
        if (base_value(base) < 0.0 || (base_value(base) == 0.0 && c < 0.0))
          throw DomainError("non-integer power of nonpositive base in " + to_string(*this));
        return pow(base, c);
      }
      if (!(base_value(base) > 0.0))
        throw DomainError("variable power of nonpositive base in " + to_string(*this));
      return exp(n.b.evaluate(vars) * log(base));
    }
    case Kind::Call: {
      const T x = n.a.evaluate(vars);
      const double x0 = base_value(x);
      switch (n.func) {
        case Func::Sin: return sin(x);
        case Func::Cos: return cos(x);
        case Func::Tan:
          if (std::cos(x0) == 0.0) throw DomainError("tan pole in " + to_string(*this));
          return tan(x);
        case Func::Exp: return exp(x);
        case Func::Log:
          if (!(x0 > 0.0)) throw DomainError("log of nonpositive value in " + to_string(*this));
          return log(x);
        case Func::Sqrt:
          if (x0 < 0.0) throw DomainError("sqrt of negative value in " + to_string(*this));
          return sqrt(x);
        case Func::Sinh: return sinh(x);
        case Func::Cosh: return cosh(x);
        case Func::Tanh: return tanh(x);
      }
      break;
    }
  }
  throw std::logic_error("corrupt expression node");
}

}  // namespace berwald
