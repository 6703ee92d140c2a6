#include <catch_amalgamated.hpp>

#include "berwald/classifier.hpp"
#include "berwald/errors.hpp"
#include "corpus.hpp"

using namespace berwald;

namespace {

ConnectionProfile make(std::initializer_list<std::pair<int, const char*>> ks, Domain d = corpus::kUnit) {
  std::array<std::string, 12> k;
  for (const auto& [i, text] : ks) k[i - 1] = text;
  return ConnectionProfile::parse(k, d);
}

}  // namespace

TEST_CASE("grid covers the inset domain and is reproducible") {
  const Domain d{0, 1, 1, 2};
  const GridSpec g;
  const auto pts = grid_points(d, g);
  REQUIRE(pts.size() == static_cast<std::size_t>(g.nt * g.nr + g.random_points));
  for (const auto& p : pts) {
    REQUIRE(p.t >= 0.01 - 1e-15);
    REQUIRE(p.t <= 0.99 + 1e-15);
    REQUIRE(p.r >= 1.01 - 1e-15);
    REQUIRE(p.r <= 1.99 + 1e-15);
  }
  const auto again = grid_points(d, g);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    REQUIRE(pts[i].t == again[i].t);
    REQUIRE(pts[i].r == again[i].r);
  }
  REQUIRE(regular_grid(d, g).size() == static_cast<std::size_t>(g.nt * g.nr));
  REQUIRE_THROWS_AS(grid_points(d, {2, 21}), ConfigError);
}

TEST_CASE("k11 and k12 gate") {
  const auto zero = check_k11_k12(corpus::profile(corpus::zero()), {}, {});
  REQUIRE(zero.size() == 1);
  REQUIRE(zero[0].pass);
  REQUIRE(zero[0].max_residual == 0.0);
  const auto bad = check_k11_k12(corpus::profile(corpus::torsion_like()), {}, {});
  REQUIRE_FALSE(bad[0].pass);
  REQUIRE(bad[0].max_residual == Catch::Approx(0.1));
  REQUIRE(bad[0].witness.has_value());
  REQUIRE(check_k11_k12(corpus::profile(corpus::minkowski()), {}, {})[0].pass);
}

TEST_CASE("w-bracket proportionality gate") {
  REQUIRE(all_pass(check_dw_proportionality(corpus::profile(corpus::minkowski()), {}, {})));
  const auto trivial = check_dw_proportionality(corpus::profile(corpus::zero()), {}, {});
  REQUIRE_FALSE(trivial[0].applicable);
  const auto generic = check_dw_proportionality(make({{7, "1"}, {10, "1"}, {8, "t"}}), {}, {});
  REQUIRE_FALSE(all_pass(generic));
  // a8 = -1 - t^2 is nonzero while a7 = 0.
  bool a8_failed = false;
  for (const auto& e : generic)
    if (e.id == "dw_a8_eq_b_a7") a8_failed = !e.pass;
  REQUIRE(a8_failed);
  REQUIRE_THROWS_AS(check_dw_proportionality(make({{7, "1"}}), {}, {}), MirroredCase);
}

TEST_CASE("capital A, B, C gate") {
  REQUIRE(all_pass(check_ABC(corpus::profile(corpus::minkowski()), {}, {})));
  const auto sch = check_ABC(corpus::profile(corpus::schwarzschild()), {}, {});
  REQUIRE(sch.size() == 3);
  REQUIRE(sch[1].id == "capital_B_zero");
  REQUIRE_FALSE(sch[1].pass);
  REQUIRE_FALSE(check_ABC(corpus::profile(corpus::zero()), {}, {})[0].applicable);
}

TEST_CASE("iterated bracket gate") {
  REQUIRE(all_pass(check_iterated_brackets(corpus::profile(corpus::minkowski()), {}, {})));
  REQUIRE(all_pass(check_iterated_brackets(corpus::profile(corpus::zero()), {}, {})));
  // k1 = r, k4 = t: a1 = 1, a2 = a3 = a4 = 0, A1 = 0, A3 = t.
  // Minor A3 a1 - A1 a3 = t is nonzero.
  const auto e = check_iterated_brackets(make({{1, "r"}, {4, "t"}}), {}, {});
  REQUIRE(e.size() == 6);
  REQUIRE_FALSE(e[0].pass);
  REQUIRE(e[0].id == "minor_A3a1_A1a3");
  REQUIRE(e[0].max_residual == Catch::Approx(0.99).epsilon(1e-12));
  REQUIRE(all_pass(check_iterated_brackets(corpus::profile(corpus::power_quadratic()), {}, {})));
}

TEST_CASE("corpus classification") {
  for (const auto& entry : corpus::all()) {
    INFO(entry.name);
    const auto rep = classify(corpus::profile(entry));
    REQUIRE(rep.label == entry.label);
    REQUIRE_FALSE(rep.mirrored);
    REQUIRE(rep.point_count == 21u * 21u + 50u);
    REQUIRE_FALSE(rep.ledger.empty());
    for (const auto& c : rep.ledger)
      if (c.applicable && !c.pass) REQUIRE(c.witness.has_value());
  }
}

TEST_CASE("decision path details") {
  const auto mink = classify(corpus::profile(corpus::minkowski()));
  REQUIRE(mink.find("capital_D_zero")->pass);
  REQUIRE(mink.find("b_zero")->pass);
  REQUIRE_FALSE(mink.find("c_zero")->pass);
  REQUIRE(mink.find("a5_zero")->pass);

  const auto sch = classify(corpus::profile(corpus::schwarzschild()));
  REQUIRE_FALSE(sch.find("capital_B_zero")->pass);
  REQUIRE_FALSE(sch.constructible());

  const auto ws = classify(corpus::profile(corpus::wsector()));
  REQUIRE(ws.find("a_nonzero") != nullptr);
  REQUIRE_FALSE(ws.find("a_nonzero")->applicable);

  const auto pw = classify(corpus::profile(corpus::power_quadratic()));
  REQUIRE_FALSE(pw.find("capital_D_zero")->pass);
  REQUIRE(pw.find("rank_A12") != nullptr);
  REQUIRE(pw.constructible());

  const auto k89 = classify(make({{8, "1"}, {9, "t"}}));
  REQUIRE(k89.label == label::kNone);
  REQUIRE_FALSE(k89.notes.empty());

  const auto k10_root = classify(make({{7, "1"}, {10, "t - 0.5"}}));
  REQUIRE(k10_root.label == label::kNone);
  REQUIRE(k10_root.find("k10_nonvanishing") != nullptr);
}

TEST_CASE("mirrored case equals classification of the swapped profile") {
  const auto swapped = corpus::profile(corpus::minkowski()).swap_roles();
  const auto rep = classify(swapped);
  REQUIRE(rep.mirrored);
  REQUIRE(rep.base_label == label::kFlatBracket);
  REQUIRE(rep.label == std::string("mirrored(") + label::kFlatBracket + ")");
  const auto direct = classify(swapped.swap_roles());
  REQUIRE(direct.label == rep.base_label);
  REQUIRE(rep.find("mirrored.capital_D_zero") != nullptr);
}

TEST_CASE("classification is deterministic") {
  const auto a = classify(corpus::profile(corpus::exponential_varying()));
  const auto b = classify(corpus::profile(corpus::exponential_varying()));
  REQUIRE(a.label == b.label);
  REQUIRE(a.ledger.size() == b.ledger.size());
  for (std::size_t i = 0; i < a.ledger.size(); ++i) {
    REQUIRE(a.ledger[i].id == b.ledger[i].id);
    REQUIRE(a.ledger[i].max_residual == b.ledger[i].max_residual);
  }
}
