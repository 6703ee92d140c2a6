#include "berwald/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "berwald/errors.hpp"

namespace berwald {

std::vector<GridPoint> regular_grid(const Domain& d, const GridSpec& g) {
  if (g.nt < 3 || g.nr < 3) throw ConfigError("grid needs at least 3 points per axis");
  const double ti = g.inset * (d.t_max - d.t_min), ri = g.inset * (d.r_max - d.r_min);
  const double t0 = d.t_min + ti, t1 = d.t_max - ti, r0 = d.r_min + ri, r1 = d.r_max - ri;
  std::vector<GridPoint> out;
  out.reserve(static_cast<std::size_t>(g.nt) * g.nr);
  for (int i = 0; i < g.nt; ++i)
    for (int j = 0; j < g.nr; ++j)
      out.push_back({t0 + (t1 - t0) * i / (g.nt - 1), r0 + (r1 - r0) * j / (g.nr - 1)});
  return out;
}

std::vector<GridPoint> grid_points(const Domain& d, const GridSpec& g) {
  auto out = regular_grid(d, g);
  std::mt19937_64 rng(g.seed);
  const double ti = g.inset * (d.t_max - d.t_min), ri = g.inset * (d.r_max - d.r_min);
  std::uniform_real_distribution<double> ut(d.t_min + ti, d.t_max - ti);
  std::uniform_real_distribution<double> ur(d.r_min + ri, d.r_max - ri);
  for (int i = 0; i < g.random_points; ++i) {
    const double t = ut(rng);
    out.push_back({t, ur(rng)});
  }
  return out;
}

const ConditionEntry* ClassificationReport::find(const std::string& id) const {
  for (const auto& e : ledger)
    if (e.id == id) return &e;
  return nullptr;
}

bool ClassificationReport::constructible() const {
  return base_label != label::kRiemannianOnly && base_label != label::kNone;
}

bool all_pass(const std::vector<ConditionEntry>& entries) {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ConditionEntry& e) { return !e.applicable || e.pass; });
}

namespace {

struct PointData {
  GridPoint at;
  std::array<double, 12> k;
  CurvatureTable ct;
  std::optional<DerivedCoeffs> dc;
};

// Upper bounds on the magnitudes of the individual terms of each capital.
Capitals capital_bounds(double a, double b, double c, const std::array<double, 6>& x) {
  a = std::fabs(a);
  b = std::fabs(b);
  c = std::fabs(c);
  std::array<double, 6> m{};
  for (int i = 1; i <= 5; ++i) m[i] = std::fabs(x[i]);
  const double ab_c = a * b + c;
  return {b * (a * m[1] + m[2]) + ab_c * (a * m[3] + m[4]) + m[5] * (2 * a * b + c),
          a * (a * m[3] + m[4]) + a * m[1] + m[2],
          ab_c * m[3] + b * (a * m[3] + m[4]) + b * (m[1] + 2 * m[5]),
          a * m[3] + m[1] + m[5],
          b * m[3],
          a * m[3] + m[1]};
}

using Probe = std::function<std::pair<double, double>(const PointData&)>;

class Context {
 public:
  Context(const ConnectionProfile& pr, const GridSpec& g, const Tolerances& tol)
      : fields_(pr), tol_(tol) {
    const auto pts = grid_points(pr.domain(), g);
    if (pts.empty()) throw ConfigError("empty classification grid");
    data_.reserve(pts.size());
    for (const auto& p : pts) {
      PointData d{p, pr.values(p.t, p.r), fields_.curvature(p.t, p.r), std::nullopt};
      try {
        d.dc = fields_.derived(d.ct, d.k);
      } catch (const MirroredCase&) {
        if (!missing_derived_) missing_derived_ = p;
      }
      data_.push_back(d);
    }
  }

  std::size_t size() const { return data_.size(); }
  const std::optional<GridPoint>& missing_derived() const { return missing_derived_; }

  ConditionEntry test(const std::string& id, const Probe& probe) const {
    ConditionEntry e;
    e.id = id;
    e.tolerance = tol_.zero;
    for (const auto& d : data_) {
      const auto [value, scale] = probe(d);
      const double mag = std::fabs(value);
      if (!std::isfinite(mag)) {
        e.max_residual = mag;
        e.witness = d.at;
        break;
      }
      if (mag > e.max_residual || !e.witness) {
        if (mag >= e.max_residual) {
          e.max_residual = mag;
          e.witness = d.at;
        }
      }
      e.scale = std::max(e.scale, scale);
    }
    e.pass = std::isfinite(e.max_residual) && e.max_residual <= tol_.zero * (1.0 + e.scale);
    if (e.pass) e.witness.reset();
    return e;
  }

  ConditionEntry field_zero(const std::string& id, const std::function<double(const PointData&)>& f) const {
    return test(id, [&](const PointData& d) {
      const double v = f(d);
      return std::pair{v, std::fabs(v)};
    });
  }

  static ConditionEntry not_applicable(const std::string& id, const std::string& note) {
    ConditionEntry e;
    e.id = id;
    e.applicable = false;
    e.note = note;
    return e;
  }

 private:
  ConnectionFields fields_;
  Tolerances tol_;
  std::vector<PointData> data_;
  std::optional<GridPoint> missing_derived_;
};

std::pair<double, double> diff_term(double lhs, double rhs) {
  return {lhs - rhs, std::max(std::fabs(lhs), std::fabs(rhs))};
}

ConditionEntry k11_k12(const Context& ctx) {
  return ctx.field_zero("k11_k12_vanish", [](const PointData& d) {
    return std::max(std::fabs(d.k[10]), std::fabs(d.k[11]));
  });
}

std::vector<ConditionEntry> dw_entries(const Context& ctx) {
  std::vector<ConditionEntry> out;
  // (id, left index, multiplier kind, right index); multiplier 0 = a, 1 = b, 2 = ab + c
  struct Row {
    const char* id;
    int lhs;
    int mult;
    int rhs;
  };
  static constexpr Row rows[] = {
      {"dw_a6_eq_a_a7", 6, 0, 7},    {"dw_a8_eq_b_a7", 8, 1, 7},   {"dw_a9_eq_abc_a7", 9, 2, 7},
      {"dw_a10_eq_a_a11", 10, 0, 11}, {"dw_a12_eq_b_a11", 12, 1, 11}, {"dw_a13_eq_abc_a11", 13, 2, 11},
  };
  for (const auto& row : rows) {
    out.push_back(ctx.test(row.id, [row](const PointData& d) {
      const DerivedCoeffs& c = *d.dc;
      const double m = row.mult == 0 ? c.a : row.mult == 1 ? c.b : c.a * c.b + c.c;
      return diff_term(d.ct.a[row.lhs], m * d.ct.a[row.rhs]);
    }));
  }
  return out;
}

std::pair<double, double> capital_probe(const PointData& d, char which) {
  const DerivedCoeffs& c = *d.dc;
  std::array<double, 6> x{};
  for (int i = 1; i <= 5; ++i) x[i] = d.ct.a[i];
  const Capitals bound = capital_bounds(c.a, c.b, c.c, x);
  switch (which) {
    case 'A': return {c.base.A, bound.A};
    case 'B': return {c.base.B, bound.B};
    case 'C': return {c.base.C, bound.C};
    case 'D': return {c.base.D, bound.D};
    case 'E': return {c.base.E, bound.E};
    default: return {c.base.F, bound.F};
  }
}

std::vector<ConditionEntry> capital_entries(const Context& ctx, const std::string& letters) {
  std::vector<ConditionEntry> out;
  for (char ch : letters)
    out.push_back(ctx.test(std::string("capital_") + ch + "_zero",
                           [ch](const PointData& d) { return capital_probe(d, ch); }));
  return out;
}

// All 2x2 minors of the pair of rows (X_i) and (a_i), i = 1..5.
std::vector<ConditionEntry> rank_entries(const Context& ctx) {
  std::vector<ConditionEntry> out;
  for (int which = 0; which < 2; ++which)
    for (int i = 1; i <= 5; ++i)
      for (int j = i + 1; j <= 5; ++j) {
        const std::string id = std::string("rank_") + (which == 0 ? "A" : "B") + std::to_string(i) +
                               std::to_string(j);
        out.push_back(ctx.test(id, [=](const PointData& d) {
          const auto& X = which == 0 ? d.ct.A : d.ct.B;
          return diff_term(X[i] * d.ct.a[j], X[j] * d.ct.a[i]);
        }));
      }
  return out;
}

// Proportionality of the iterated brackets to [delta_t, delta_r] when delta_w is trivial.
std::vector<ConditionEntry> onevar_entries(const Context& ctx) {
  std::vector<ConditionEntry> out;
  for (int which = 0; which < 2; ++which) {
    const std::string tag = which == 0 ? "A" : "B";
    auto X = [which](const PointData& d) -> const std::array<double, 6>& {
      return which == 0 ? d.ct.A : d.ct.B;
    };
    out.push_back(ctx.test("minor_" + tag + "3a1_" + tag + "1a3", [=](const PointData& d) {
      return diff_term(X(d)[3] * d.ct.a[1], X(d)[1] * d.ct.a[3]);
    }));
    out.push_back(ctx.test("minor_" + tag + "4a2_" + tag + "2a4", [=](const PointData& d) {
      return diff_term(X(d)[4] * d.ct.a[2], X(d)[2] * d.ct.a[4]);
    }));
    out.push_back(ctx.test("minor_" + tag + "_mixed", [=](const PointData& d) {
      const auto& x = X(d);
      const auto& a = d.ct.a;
      const double v = x[3] * a[2] - x[2] * a[3] - x[1] * a[4] + x[4] * a[1];
      const double s = std::max({std::fabs(x[3] * a[2]), std::fabs(x[2] * a[3]),
                                 std::fabs(x[1] * a[4]), std::fabs(x[4] * a[1])});
      return std::pair{v, s};
    }));
  }
  return out;
}

bool zero_all(const Context& ctx, const std::vector<int>& ks, std::vector<ConditionEntry>& ledger) {
  bool all = true;
  for (int k : ks) {
    auto e = ctx.field_zero("k" + std::to_string(k) + "_zero",
                            [k](const PointData& d) { return d.k[k - 1]; });
    all = all && e.pass;
    ledger.push_back(std::move(e));
  }
  return all;
}

bool delta_w_trivial(const Context& ctx) {
  for (int k : {7, 8, 9, 10})
    if (!ctx.field_zero("k", [k](const PointData& d) { return d.k[k - 1]; }).pass) return false;
  return true;
}

void append(std::vector<ConditionEntry>& dst, std::vector<ConditionEntry> src) {
  for (auto& e : src) dst.push_back(std::move(e));
}

ClassificationReport classify_impl(const ConnectionProfile& pr, const GridSpec& g,
                                   const Tolerances& tol, int depth) {
  ClassificationReport rep;
  rep.tolerances = tol;
  rep.grid = g;
  const Context ctx(pr, g, tol);
  rep.point_count = ctx.size();
  auto finish = [&](const char* l) {
    rep.base_label = l;
    rep.label = l;
    return rep;
  };

  auto k11 = k11_k12(ctx);
  const bool k11_ok = k11.pass;
  rep.ledger.push_back(std::move(k11));
  if (!k11_ok) return finish(label::kNone);

  const bool trivial = zero_all(ctx, {7, 8, 9, 10}, rep.ledger);
  if (trivial) {
    bool flat = true;
    for (int i = 1; i <= 4; ++i) {
      auto e = ctx.field_zero("a" + std::to_string(i) + "_zero",
                              [i](const PointData& d) { return d.ct.a[i]; });
      flat = flat && e.pass;
      rep.ledger.push_back(std::move(e));
    }
    auto minors = onevar_entries(ctx);
    const bool minors_ok = all_pass(minors);
    append(rep.ledger, std::move(minors));
    if (flat) return finish(label::kFree2D);
    return finish(minors_ok ? label::kOneVar : label::kNone);
  }

  const bool k10_zero = rep.find("k10_zero")->pass;
  if (k10_zero) {
    if (!rep.find("k7_zero")->pass && depth == 0) {
      ClassificationReport inner = classify_impl(pr.swap_roles(), g, tol, depth + 1);
      inner.notes.insert(inner.notes.begin(),
                         "k10 vanishes identically while k7 does not; classified the profile with "
                         "the roles of t and r exchanged");
      std::vector<ConditionEntry> ledger = rep.ledger;
      for (auto& e : inner.ledger) {
        e.id = "mirrored." + e.id;
        ledger.push_back(std::move(e));
      }
      inner.ledger = std::move(ledger);
      inner.mirrored = true;
      inner.label = "mirrored(" + inner.base_label + ")";
      inner.point_count = rep.point_count;
      return inner;
    }
    rep.notes.push_back(
        "k7 and k10 vanish identically but k8 or k9 does not; delta_w then forces a w-independent L, "
        "whose metric is degenerate");
    return finish(label::kNone);
  }

  if (const auto& miss = ctx.missing_derived()) {
    ConditionEntry e;
    e.id = "k10_nonvanishing";
    e.pass = false;
    e.witness = *miss;
    e.note = "k10 vanishes at a grid point without vanishing identically";
    rep.ledger.push_back(e);
    return finish(label::kNone);
  }

  auto dw = dw_entries(ctx);
  auto abc = capital_entries(ctx, "ABC");
  auto def = capital_entries(ctx, "DEF");
  const bool D_zero = def[0].pass, E_zero = def[1].pass, F_zero = def[2].pass;
  const bool def_zero = D_zero && E_zero && F_zero;
  std::vector<ConditionEntry> rank;
  if (def_zero)
    rank.push_back(Context::not_applicable("rank_brackets", "D = E = F = 0 on the grid"));
  else
    rank = rank_entries(ctx);

  const bool quadratic_forced = !dw[0].pass || !dw[3].pass || !abc[1].pass;
  const bool structural_fail = !all_pass(dw) || !all_pass(abc) || !all_pass(rank);
  append(rep.ledger, std::move(dw));
  append(rep.ledger, std::move(abc));
  append(rep.ledger, std::move(def));
  append(rep.ledger, std::move(rank));

  if (quadratic_forced) return finish(label::kRiemannianOnly);
  if (structural_fail) return finish(label::kNone);

  if (!def_zero) {
    if (!D_zero) return finish(label::kPower);
    if (!E_zero) return finish(label::kExponential);
    rep.notes.push_back("D = E = 0 with F nonzero admits no nonzero solution");
    return finish(label::kNone);
  }
  auto b_zero = ctx.field_zero("b_zero", [](const PointData& d) { return d.dc->b; });
  auto c_zero = ctx.field_zero("c_zero", [](const PointData& d) { return d.dc->c; });
  const bool bc_zero = b_zero.pass && c_zero.pass;
  rep.ledger.push_back(std::move(b_zero));
  rep.ledger.push_back(std::move(c_zero));
  if (bc_zero) {
    auto a_zero = ctx.field_zero("a_nonzero", [](const PointData& d) { return d.dc->a; });
    a_zero.pass = !a_zero.pass;
    a_zero.applicable = false;
    a_zero.note = "informational: pass means a is not identically zero";
    rep.ledger.push_back(std::move(a_zero));
    return finish(label::kWsector);
  }
  bool flat = true;
  for (int i = 1; i <= 5; ++i) {
    auto e = ctx.field_zero("a" + std::to_string(i) + "_zero",
                            [i](const PointData& d) { return d.ct.a[i]; });
    flat = flat && e.pass;
    rep.ledger.push_back(std::move(e));
  }
  return finish(flat ? label::kFlatBracket : label::kRiemannianOnly);
}

}  // namespace

std::vector<ConditionEntry> check_k11_k12(const ConnectionProfile& pr, const GridSpec& g,
                                          const Tolerances& tol) {
  return {k11_k12(Context(pr, g, tol))};
}

std::vector<ConditionEntry> check_dw_proportionality(const ConnectionProfile& pr,
                                                     const GridSpec& g, const Tolerances& tol) {
  const Context ctx(pr, g, tol);
  if (delta_w_trivial(ctx))
    return {Context::not_applicable("dw_proportionality", "delta_w is trivial")};
  if (ctx.missing_derived()) throw MirroredCase("k10 vanishes on the grid; use swap_roles");
  return dw_entries(ctx);
}

std::vector<ConditionEntry> check_ABC(const ConnectionProfile& pr, const GridSpec& g,
                                      const Tolerances& tol) {
  const Context ctx(pr, g, tol);
  if (delta_w_trivial(ctx)) return {Context::not_applicable("capitals_ABC", "delta_w is trivial")};
  if (ctx.missing_derived()) throw MirroredCase("k10 vanishes on the grid; use swap_roles");
  return capital_entries(ctx, "ABC");
}

std::vector<ConditionEntry> check_iterated_brackets(const ConnectionProfile& pr,
                                                    const GridSpec& g, const Tolerances& tol) {
  const Context ctx(pr, g, tol);
  if (delta_w_trivial(ctx)) return onevar_entries(ctx);
  if (ctx.missing_derived()) throw MirroredCase("k10 vanishes on the grid; use swap_roles");
  const auto def = capital_entries(ctx, "DEF");
  if (all_pass(def)) return {Context::not_applicable("rank_brackets", "D = E = F = 0 on the grid")};
  return rank_entries(ctx);
}

ClassificationReport classify(const ConnectionProfile& pr, const GridSpec& g,
                              const Tolerances& tol) {
  return classify_impl(pr, g, tol, 0);
}

}  // namespace berwald
