#include "berwald/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstring>
#include <optional>

namespace berwald {

const VarSet& coordinate_vars() {
  static const VarSet vars{"t", "r"};
  return vars;
}

namespace {

constexpr std::array<std::pair<const char*, Func>, 9> kFunctions{{
    {"sin", Func::Sin},
    {"cos", Func::Cos},
    {"tan", Func::Tan},
    {"exp", Func::Exp},
    {"log", Func::Log},
    {"sqrt", Func::Sqrt},
    {"sinh", Func::Sinh},
    {"cosh", Func::Cosh},
    {"tanh", Func::Tanh},
}};

double apply(Func f, double x) {
  switch (f) {
    case Func::Sin: return std::sin(x);
    case Func::Cos: return std::cos(x);
    case Func::Tan: return std::tan(x);
    case Func::Exp: return std::exp(x);
    case Func::Log: return std::log(x);
    case Func::Sqrt: return std::sqrt(x);
    case Func::Sinh: return std::sinh(x);
    case Func::Cosh: return std::cosh(x);
    case Func::Tanh: return std::tanh(x);
  }
  return x;
}

}  // namespace

const char* func_name(Func f) {
  for (const auto& [name, fn] : kFunctions)
    if (fn == f) return name;
  return "?";
}

Expr::Expr() = default;

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) throw DomainError("non-finite constant in expression");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Constant;
  n->value = value == 0.0 ? 0.0 : value;
  return Expr(n);
}

Expr Expr::variable(int slot, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->slot = slot;
  n->name = std::move(name);
  return Expr(n);
}

namespace {

// Folds a constant result only when it stays finite, so domain errors surface at
// evaluation with the offending subtree intact.
std::optional<Expr> fold(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  return Expr::constant(v);
}

}  // namespace

Expr Expr::call(Func f, const Expr& arg) {
  if (arg.is_constant()) {
    const double x = arg.value();
    const bool in_domain = !(f == Func::Log && x <= 0.0) && !(f == Func::Sqrt && x < 0.0);
    if (in_domain)
      if (auto c = fold(apply(f, x))) return *c;
  }
  return unfolded_call(f, arg);
}

Expr Expr::unfolded_call(Func f, const Expr& arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->func = f;
  n->a = arg;
  return Expr(n);
}

Expr Expr::binary(Kind kind, const Expr& a, const Expr& b) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = a;
  n->b = b;
  return Expr(n);
}

Expr Expr::power(const Expr& base, const Expr& exponent) {
  if (exponent.is_constant(1.0)) return base;
  if (exponent.is_constant(0.0)) return constant(1.0);
  if (base.is_constant() && exponent.is_constant()) {
    const double x = base.value(), c = exponent.value();
    if (x > 0.0 || (x < 0.0 && c == std::floor(c)) || (x == 0.0 && c > 0.0))
      if (auto v = fold(std::pow(x, c))) return *v;
  }
  return binary(Kind::Pow, base, exponent);
}

Expr Expr::operator-() const {
  if (is_constant()) return constant(-value());
  if (kind() == Kind::Negate) return left();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Negate;
  n->a = *this;
  return Expr(n);
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant())
    if (auto v = fold(a.value() + b.value())) return *v;
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::binary(Expr::Kind::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant())
    if (auto v = fold(a.value() - b.value())) return *v;
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return Expr::binary(Expr::Kind::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant())
    if (auto v = fold(a.value() * b.value())) return *v;
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return Expr::binary(Expr::Kind::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0)
    if (auto v = fold(a.value() / b.value())) return *v;
  if (b.is_constant(1.0)) return a;
  return Expr::binary(Expr::Kind::Div, a, b);
}

Expr::Kind Expr::kind() const { return node().kind; }
double Expr::value() const { return node().value; }
int Expr::slot() const { return node().slot; }
const std::string& Expr::name() const { return node().name; }
Func Expr::func() const { return node().func; }
const Expr& Expr::left() const { return node().a; }
const Expr& Expr::right() const { return node().b; }

int Expr::max_slot() const {
  switch (kind()) {
    case Kind::Constant: return -1;
    case Kind::Variable: return slot();
    case Kind::Negate:
    case Kind::Call: return left().max_slot();
    default: return std::max(left().max_slot(), right().max_slot());
  }
}

std::size_t Expr::node_count() const {
  switch (kind()) {
    case Kind::Constant:
    case Kind::Variable: return 1;
    case Kind::Negate:
    case Kind::Call: return 1 + left().node_count();
    default: return 1 + left().node_count() + right().node_count();
  }
}

double Expr::eval(double t, double r) const {
  const std::array<double, 2> vars{t, r};
  return evaluate<double>(vars);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(std::string_view text, const VarSet& vars) : text_(text), vars_(vars) {}

  Expr run() {
    skip_space();
    if (pos_ == text_.size()) throw SyntaxError("empty input", 0);
    Expr e = expr();
    skip_space();
    if (pos_ != text_.size())
      throw SyntaxError("unexpected '" + std::string(1, text_[pos_]) + "' at offset " +
                            std::to_string(pos_),
                        pos_);
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    const std::string found =
        pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
    throw SyntaxError(what + ", found " + found + " at offset " + std::to_string(pos_), pos_);
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = raw(Expr::Kind::Add, e, term());
      else if (accept('-'))
        e = raw(Expr::Kind::Sub, e, term());
      else
        return e;
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (accept('*'))
        e = raw(Expr::Kind::Mul, e, factor());
      else if (accept('/'))
        e = raw(Expr::Kind::Div, e, factor());
      else
        return e;
    }
  }

  Expr factor() {
    Expr base = unary();
    if (accept('^')) return raw(Expr::Kind::Pow, base, factor());
    return base;
  }

  Expr unary() {
    if (accept('-')) {
      Expr a = atom();
      return a.is_constant() ? Expr::constant(-a.value()) : -a;
    }
    return atom();
  }

  Expr atom() {
    skip_space();
    if (pos_ == text_.size()) fail("expected operand");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      Expr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    fail("expected operand");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        digits();
      else
        pos_ = save;
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
      pos_ = start;
      fail("malformed number");
    }
    if (!std::isfinite(value)) {
      pos_ = start;
      fail("number out of range");
    }
    return Expr::constant(value);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view id = text_.substr(start, pos_ - start);
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == id) return Expr::variable(static_cast<int>(i), vars_[i]);
    for (const auto& [name, f] : kFunctions) {
      if (id == name) {
        if (!accept('(')) fail("expected '(' after function " + std::string(id));
        Expr arg = expr();
        if (!accept(')')) fail("expected ')'");
        return raw_call(f, arg);
      }
    }
    throw SyntaxError("unknown identifier " + std::string(id) + " at offset " +
                          std::to_string(start),
                      start);
  }

  static Expr raw(Expr::Kind kind, const Expr& a, const Expr& b) { return Expr::binary(kind, a, b); }
  static Expr raw_call(Func f, const Expr& a) { return Expr::unfolded_call(f, a); }

  std::string_view text_;
  const VarSet& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const VarSet& vars) { return Parser(text, vars).run(); }

// ---------------------------------------------------------------------------
// Symbolic differentiation

Expr diff(const Expr& e, int slot) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant: return Expr::constant(0.0);
    case K::Variable: return Expr::constant(e.slot() == slot ? 1.0 : 0.0);
    case K::Negate: return -diff(e.left(), slot);
    case K::Add: return diff(e.left(), slot) + diff(e.right(), slot);
    case K::Sub: return diff(e.left(), slot) - diff(e.right(), slot);
    case K::Mul: {
      const Expr& a = e.left();
      const Expr& b = e.right();
      return diff(a, slot) * b + a * diff(b, slot);
    }
    case K::Div: {
      const Expr& a = e.left();
      const Expr& b = e.right();
      const Expr da = diff(a, slot), db = diff(b, slot);
      if (db.is_constant(0.0)) return da / b;
      return (da * b - a * db) / pow(b, 2.0);
    }
    case K::Pow: {
      const Expr& a = e.left();
      const Expr& b = e.right();
      const Expr da = diff(a, slot);
      if (b.is_constant()) {
        const double c = b.value();
        return Expr::constant(c) * pow(a, c - 1.0) * da;
      }
      const Expr db = diff(b, slot);
      return e * (db * log(a) + b * da / a);
    }
    case K::Call: {
      const Expr& a = e.left();
      const Expr da = diff(a, slot);
      if (da.is_constant(0.0)) return da;
      switch (e.func()) {
        case Func::Sin: return Expr::call(Func::Cos, a) * da;
        case Func::Cos: return -(Expr::call(Func::Sin, a) * da);
        case Func::Tan: return (1.0 + pow(Expr::call(Func::Tan, a), 2.0)) * da;
        case Func::Exp: return e * da;
        case Func::Log: return da / a;
        case Func::Sqrt: return da / (2.0 * e);
        case Func::Sinh: return Expr::call(Func::Cosh, a) * da;
        case Func::Cosh: return Expr::call(Func::Sinh, a) * da;
        case Func::Tanh: return (1.0 - pow(e, 2.0)) * da;
      }
    }
  }
  throw std::logic_error("corrupt expression node");
}

Expr remap(const Expr& e, const std::vector<int>& slot_map, const VarSet& names) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant: return e;
    case K::Variable: {
      if (e.slot() < 0 || static_cast<std::size_t>(e.slot()) >= slot_map.size())
        throw std::out_of_range("remap: unmapped variable " + e.name());
      const int to = slot_map[e.slot()];
      return Expr::variable(to, names.at(to));
    }
    case K::Negate: return -remap(e.left(), slot_map, names);
    case K::Call: return Expr::unfolded_call(e.func(), remap(e.left(), slot_map, names));
    default:
      return Expr::binary(e.kind(), remap(e.left(), slot_map, names),
                          remap(e.right(), slot_map, names));
  }
}

// ---------------------------------------------------------------------------
// Printer

namespace {

// Binding levels: sums 1, products 2, powers 3, negation 4, atoms 5.
int level(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Add:
    case K::Sub: return 1;
    case K::Mul:
    case K::Div: return 2;
    case K::Pow: return 3;
    case K::Negate: return 4;
    default: return 5;
  }
}

void print(const Expr& e, std::string& out);

void print_at(const Expr& e, int required, std::string& out) {
  if (level(e) < required) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print(const Expr& e, std::string& out) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant: {
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof buf, e.value());
      const std::string text(buf, res.ptr);
      if (e.value() < 0.0)
        out += "(" + text + ")";
      else
        out += text;
      return;
    }
    case K::Variable: out += e.name(); return;
    case K::Negate:
      out += '-';
      print_at(e.left(), 5, out);
      return;
    case K::Call:
      out += func_name(e.func());
      out += '(';
      print(e.left(), out);
      out += ')';
      return;
    case K::Pow:
      print_at(e.left(), 4, out);
      out += '^';
      print_at(e.right(), 3, out);
      return;
    default: {
      const int lv = level(e);
      print_at(e.left(), lv, out);
      switch (e.kind()) {
        case K::Add: out += " + "; break;
        case K::Sub: out += " - "; break;
        case K::Mul: out += '*'; break;
        default: out += '/'; break;
      }
      print_at(e.right(), lv + 1, out);
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

}  // namespace berwald
