#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "berwald/constructor.hpp"
#include "berwald/errors.hpp"
#include "berwald/quadrature.hpp"
#include "berwald/verifier.hpp"
#include "corpus.hpp"

using namespace berwald;

namespace {

constexpr double kQuadTol = 1e-10;
constexpr double kSpreadTol = 1e-8;
constexpr double kSlopeSpreadTol = 1e-7;
constexpr double kFlatTol = 1e-9;
constexpr double kNonFlat = 1e-3;
constexpr double kMirrorTol = 1e-12;

Construction build(const corpus::Entry& e) {
  const auto pr = corpus::profile(e);
  return construct(pr, classify(pr));
}

}  // namespace

TEST_CASE("quadrature reproduces closed-form integrals") {
  REQUIRE(integrate([](double x) { return x * x; }, 0, 1) == Catch::Approx(1.0 / 3).margin(kQuadTol));
  REQUIRE(integrate([](double x) { return std::sin(x); }, 0, std::numbers::pi) ==
          Catch::Approx(2.0).margin(kQuadTol));
  REQUIRE(integrate([](double x) { return std::exp(x); }, 1, 0) ==
          Catch::Approx(1.0 - std::exp(1.0)).margin(kQuadTol));
  REQUIRE(integrate([](double) { return 0.0; }, -3, 5) == Catch::Approx(0.0).margin(kQuadTol));
  REQUIRE(integrate([](double x) { return 1.0 / x; }, 1, 2) ==
          Catch::Approx(std::log(2.0)).margin(kQuadTol));
  REQUIRE(integrate([](double x) { return x; }, 2, 2) == 0.0);
}

TEST_CASE("quadrature rejects non-finite integrands") {
  REQUIRE_THROWS_AS(integrate([](double x) { return 1.0 / (x - 0.5) / 0.0; }, 0, 1), DomainError);
}

TEST_CASE("line integral of an exact form is its potential") {
  const VarSet& v = coordinate_vars();
  const auto li = LineIntegral::from_exprs(parse("2*t*r", v), parse("t^2", v), 0.5, 1.0);
  for (double t : {0.0, 0.3, 1.0})
    for (double r : {1.0, 1.4, 2.0})
      REQUIRE(li(t, r) == Catch::Approx(t * t * r - 0.25).margin(kQuadTol));
  const auto pts = grid_points({0, 1, 1, 2}, {});
  REQUIRE(li.require_closed(pts, kCurlTol) <= kCurlTol);
}

TEST_CASE("line integral of a non-closed form is rejected") {
  const VarSet& v = coordinate_vars();
  const auto li = LineIntegral::from_exprs(parse("r", v), parse("-t", v), 0, 1);
  REQUIRE(li.curl(0.5, 1.5) == Catch::Approx(2.0));
  REQUIRE_THROWS_AS(li.require_closed(grid_points({0, 1, 1, 2}, {}), kCurlTol), ConstructionError);
}

TEST_CASE("lambda = F/D is constant on power profiles") {
  const Spread q = lambda_spread(corpus::profile(corpus::power_quadratic()));
  REQUIRE(q.spread() < kSpreadTol);
  REQUIRE(q.mean == Catch::Approx(2.0).margin(kSpreadTol));
  const Spread h = lambda_spread(corpus::profile(corpus::power_three_halves()));
  REQUIRE(h.spread() < kSpreadTol);
  REQUIRE(h.mean == Catch::Approx(1.5).margin(kSpreadTol));
  const Spread w = lambda_spread(corpus::profile(corpus::power_weyl()));
  REQUIRE(w.spread() < kSpreadTol);
  REQUIRE(w.count > 0);
}

TEST_CASE("mu = F/E on exponential profiles") {
  const Spread c = mu_spread(corpus::profile(corpus::exponential_constant()));
  REQUIRE(c.spread() < kSpreadTol);
  REQUIRE(c.mean == Catch::Approx(4.0).margin(kSpreadTol));
  const auto varying = corpus::profile(corpus::exponential_varying());
  REQUIRE(mu_spread(varying).spread() > kNonFlat);
  REQUIRE(mu_log_derivative_residual(varying) < kSpreadTol);
  REQUIRE(mu_log_derivative_residual(corpus::profile(corpus::exponential_constant())) < kSpreadTol);
}

TEST_CASE("one-variable K and T do not depend on the slope") {
  for (const auto& e : {corpus::onevar_de_sitter(), corpus::onevar_alternative()}) {
    INFO(e.name);
    const auto pr = corpus::profile(e);
    const double p0 = onevar_default_p0(pr);
    for (const auto& g : regular_grid(pr.domain(), {.nt = 5, .nr = 5})) {
      const auto [K0, T0] = onevar_KT(pr, g.t, g.r, p0, p0);
      for (double dp : {-0.2, -0.1, 0.1, 0.2}) {
        const auto [K, T] = onevar_KT(pr, g.t, g.r, p0 + dp, p0);
        REQUIRE(std::fabs(K - K0) < kSlopeSpreadTol * (1 + std::fabs(K0)));
        REQUIRE(std::fabs(T - T0) < kSlopeSpreadTol * (1 + std::fabs(T0)));
      }
    }
  }
}

TEST_CASE("parallel transport is path independent exactly on flat brackets") {
  for (const auto& e : {corpus::zero(), corpus::minkowski(), corpus::wsector()}) {
    INFO(e.name);
    const auto pr = corpus::profile(e);
    const auto& d = pr.domain();
    REQUIRE(transport_discrepancy(pr, d.t_min, d.r_min, d.t_max, d.r_max) < kFlatTol);
  }
  const auto curved = corpus::profile(corpus::power_three_halves());
  const auto& d = curved.domain();
  REQUIRE(transport_discrepancy(curved, d.t_min, d.r_min, d.t_max, d.r_max) > kNonFlat);
  REQUIRE_THROWS_AS(build_transport(curved), ConstructionError);
}

TEST_CASE("transport matrices compose to the identity around a closed flat loop") {
  const auto pr = corpus::profile(corpus::minkowski());
  const Matrix3 id = transport_matrix(pr, 0.5, 2.0, 0.5, 2.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) REQUIRE(id[i][j] == Catch::Approx(i == j ? 1.0 : 0.0).margin(kFlatTol));
}

TEST_CASE("construct dispatches on the label and records metadata") {
  const auto power = build(corpus::power_three_halves());
  REQUIRE(power.info.kind == "power");
  REQUIRE(power.info.constant("lambda").value() == Catch::Approx(1.5).margin(kSpreadTol));
  REQUIRE(power.info.constant("rho_E_over_D_at_base").has_value());
  REQUIRE_FALSE(power.info.tables.empty());
  REQUIRE_FALSE(power.info.degenerate);

  const auto exp4 = build(corpus::exponential_constant());
  REQUIRE(exp4.info.constant("mu_at_base").value() == Catch::Approx(4.0).margin(kSpreadTol));

  REQUIRE(build(corpus::zero()).info.kind == "transport");
  REQUIRE(build(corpus::minkowski()).info.label == label::kFlatBracket);
  REQUIRE(build(corpus::onevar_de_sitter()).info.constant("p0").has_value());
  REQUIRE_FALSE(build(corpus::wsector()).info.warnings.empty());
}

TEST_CASE("degenerate constructions are flagged") {
  REQUIRE(build(corpus::power_quadratic()).info.degenerate);
  REQUIRE(build(corpus::wsector()).info.degenerate);
  REQUIRE_FALSE(build(corpus::onevar_alternative()).info.degenerate);
}

TEST_CASE("non-constructible labels are refused") {
  for (const auto& e : {corpus::schwarzschild(), corpus::torsion_like()}) {
    const auto pr = corpus::profile(e);
    REQUIRE_THROWS_AS(construct(pr, classify(pr)), ConstructionError);
  }
}

TEST_CASE("mirrored models swap t and r") {
  const ModelPtr inner = std::make_shared<ExprModel>("dt^2 - 2*dr^2 - t*w^2");
  const ModelPtr m = mirror(inner);
  const SamplePoint p{1.5, 0.5, 1.0, 0.2, 0.7, 1.1, 0.3, -0.4};
  SamplePoint q = p;
  std::swap(q.t, q.r);
  std::swap(q.dt, q.dr);
  REQUIRE(eval_L_value(*m, p) == Catch::Approx(eval_L_value(*inner, q)).margin(kMirrorTol));
  REQUIRE(m->tag() == "mirrored(expression)");
}

TEST_CASE("swapped Minkowski profile is built through the mirror") {
  const auto pr = corpus::profile(corpus::minkowski()).swap_roles();
  const auto rep = classify(pr);
  REQUIRE(rep.mirrored);
  const auto c = construct(pr, rep);
  REQUIRE(c.model->tag() == "mirrored(transport)");
  REQUIRE(residual_sweep(*c.model, pr, {.samples = 50}).pass());
}

TEST_CASE("every constructible corpus profile yields a passing model") {
  for (const auto& e : corpus::all()) {
    const auto pr = corpus::profile(e);
    const auto rep = classify(pr);
    if (!rep.constructible()) continue;
    INFO(e.name);
    const auto c = construct(pr, rep);
    SweepOptions opt;
    opt.samples = 100;
    opt.degenerate = c.info.degenerate;
    const auto v = residual_sweep(*c.model, pr, opt);
    for (const auto& ch : v.checks) {
      INFO(ch.name << " max " << ch.max << " n " << ch.samples << " " << ch.note);
      REQUIRE(ch.pass());
    }
  }
}
