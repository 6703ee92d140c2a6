#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "berwald/finsler.hpp"
#include "oracles.hpp"

using namespace berwald;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kExact = 1e-12;
constexpr double kChannelTol = 1e-10;
constexpr double kFdRelTol = 1e-6;
constexpr double kFallbackTol = 1e-4;
constexpr double kControl = 1e-3;

const char* const kMinkowski = "dt^2 - dr^2 - r^2*(dth^2 + sin(th)^2*dph^2)";
const char* const kQuartic = "sqrt(dt^4 + dr^4 + w^4)";

ConnectionProfile minkowski_profile() {
  std::array<std::string, 12> k;
  k[8] = "1/r";
  k[9] = "-r";
  return ConnectionProfile::parse(k, {0, 1, 1, 5});
}

ConnectionProfile zero_profile() { return ConnectionProfile::parse({}, {0, 1, 1, 2}); }

SamplePoint random_sample(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2, 2), t(0.1, 0.9), r(1.2, 1.8), th(0.4, 2.7),
      ph(0, 6);
  SamplePoint p{t(rng), r(rng), th(rng), ph(rng), u(rng), u(rng), u(rng), u(rng)};
  return p;
}

}  // namespace

TEST_CASE("L values of simple models") {
  const ExprModel mink(kMinkowski);
  REQUIRE(eval_L(mink, {0, 2, kPi / 2, 0, 1, 0, 0, 0}, 2).base() == Catch::Approx(1.0));
  REQUIRE(eval_L(mink, {0, 2, kPi / 2, 0, 1, 1, 1, 0}, 2).base() == Catch::Approx(-4.0));
  const ExprModel quartic(kQuartic);
  const SamplePoint p{0, 2, kPi / 2, 0, 1, 1, 1, 0};
  REQUIRE(eval_L(quartic, p, 2).base() == Catch::Approx(std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("quartic jet partials match finite differences") {
  const ExprModel quartic(kQuartic);
  const SamplePoint p{0.3, 1.5, 1.1, 0.4, 1.0, 1.0, 1.0, 0.0};
  const VJet L = eval_L(quartic, p, 2);
  for (int a = 0; a < 4; ++a) {
    auto f = [&](double x) {
      auto v = p.v();
      v[a] = x;
      return eval_L_value(quartic, SamplePoint::from(p.x(), v));
    };
    VJet::Index e{};
    e[a] = 1;
    REQUIRE(oracle::rel_err(L.partial(e), oracle::richardson(f, p.v()[a], 1e-3)) < kFdRelTol);
  }
}

TEST_CASE("metric tensor") {
  const ExprModel mink(kMinkowski);
  const auto g = metric(mink, {0, 2, kPi / 2, 0, 1, 0.2, 0.3, 0.1});
  const Matrix4 want{{{1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -4, 0}, {0, 0, 0, -4}}};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) REQUIRE(g.g[a][b] == Catch::Approx(want[a][b]).margin(kExact));
  REQUIRE(g.det == Catch::Approx(-16.0));

  const auto g2 = metric(mink, {0, 2, kPi / 2, 0, -1.3, 0.7, 1.1, -0.4});
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) REQUIRE(g2.g[a][b] == Catch::Approx(want[a][b]).margin(kExact));

  const ExprModel quartic(kQuartic);
  const SamplePoint p{0.3, 1.5, 1.1, 0.4, 1.0, 1.0, 1.0, 0.0};
  const auto gq = metric(quartic, p);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      REQUIRE(gq.g[a][b] == gq.g[b][a]);
      auto f = [&](double x) {
        auto v = p.v();
        v[b] = x;
        VJet::Index e{};
        e[a] = 1;
        return 0.5 * eval_L(quartic, SamplePoint::from(p.x(), v), 1).partial(e);
      };
      REQUIRE(oracle::rel_err(gq.g[a][b], oracle::richardson(f, p.v()[b], 1e-3)) < kFdRelTol);
    }
}

TEST_CASE("geodesic spray") {
  const ExprModel mink(kMinkowski);
  const auto G = spray(mink, {0, 2, kPi / 2, 0, 0, 1, 1, 0});
  REQUIRE(G[2] == Catch::Approx(0.5).margin(kExact));

  const ExprModel quartic(kQuartic);
  const SamplePoint p{0.2, 1.4, 1.0, 0.3, 0.8, -0.6, 0.5, 1.2};
  const auto Gq = spray(quartic, p);
  REQUIRE(Gq[0] == Catch::Approx(0.0).margin(kChannelTol));
  REQUIRE(Gq[1] == Catch::Approx(0.0).margin(kChannelTol));
  REQUIRE(Gq[2] == Catch::Approx(-std::sin(p.th) * std::cos(p.th) * p.dph * p.dph / 2).margin(kChannelTol));

  SamplePoint scaled = p;
  for (double* v : {&scaled.dt, &scaled.dr, &scaled.dth, &scaled.dph}) *v *= 2.5;
  const auto Gs = spray(quartic, scaled);
  for (int a = 0; a < 4; ++a) REQUIRE(Gs[a] == Catch::Approx(6.25 * Gq[a]).margin(kChannelTol));
}

TEST_CASE("nonlinear connection") {
  const ExprModel mink(kMinkowski);
  const auto pr = minkowski_profile();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    SamplePoint p = random_sample(rng);
    const Matrix4 n = nonlinear_connection(mink, p);
    const Matrix4 want = nonlinear_from_profile(pr, p);
    const auto G = spray(mink, p);
    for (int a = 0; a < 4; ++a) {
      double contracted = 0.0;
      for (int b = 0; b < 4; ++b) {
        REQUIRE(n[a][b] == Catch::Approx(want[a][b]).margin(kChannelTol));
        contracted += n[a][b] * p.v()[b];
      }
      REQUIRE(contracted == Catch::Approx(2 * G[a]).margin(kChannelTol));
    }
  }
  const ExprModel quartic(kQuartic);
  for (int i = 0; i < 20; ++i) {
    SamplePoint p = random_sample(rng);
    const Matrix4 n = nonlinear_connection(quartic, p);
    const auto G = spray(quartic, p);
    for (int a = 0; a < 4; ++a) {
      double contracted = 0.0;
      for (int b = 0; b < 4; ++b) contracted += n[a][b] * p.v()[b];
      REQUIRE(contracted == Catch::Approx(2 * G[a]).margin(kChannelTol));
    }
  }
}

TEST_CASE("Berwald curvature") {
  const SamplePoint p{0.4, 1.6, 1.2, 0.5, 0.9, 0.3, -0.4, 0.7};
  REQUIRE(berwald_curvature_norm(ExprModel(kMinkowski), p) < 1e-9);
  REQUIRE(berwald_curvature_norm(ExprModel(kQuartic), p) < 1e-8);
  const ExprModel perturbed(std::string(kMinkowski) + " + dt^3*dr/(dt + dr)");
  REQUIRE(berwald_curvature_norm(perturbed, p) > kControl);
}

TEST_CASE("horizontal residuals") {
  std::mt19937_64 rng(9);
  const ExprModel mink(kMinkowski), quartic(kQuartic);
  const auto mp = minkowski_profile();
  const auto zp = zero_profile();
  double worst_control = 0.0;
  for (int i = 0; i < 20; ++i) {
    const SamplePoint p = random_sample(rng);
    for (double v : horizontal_residuals(mink, mp, p)) REQUIRE(std::fabs(v) < kChannelTol);
    for (double v : horizontal_residuals(quartic, zp, p)) REQUIRE(std::fabs(v) < kChannelTol);
    for (double v : horizontal_residuals(quartic, mp, p)) worst_control = std::max(worst_control, std::fabs(v));
  }
  REQUIRE(worst_control > kControl);
}

TEST_CASE("finite-difference position channel") {
  std::mt19937_64 rng(10);
  const ExprModel fd(kMinkowski, false);
  const auto mp = minkowski_profile();
  for (int i = 0; i < 10; ++i) {
    const SamplePoint p = random_sample(rng);
    for (double v : horizontal_residuals(fd, mp, p))
      REQUIRE(std::fabs(v) / residual_scale(fd, p) < kFallbackTol);
  }
}

TEST_CASE("Euler residual") {
  std::mt19937_64 rng(12);
  const ExprModel mink(kMinkowski), quartic(kQuartic);
  const ExprModel one_homogeneous("sqrt(dt^2 + dr^2 + w^2)");
  for (int i = 0; i < 10; ++i) {
    const SamplePoint p = random_sample(rng);
    REQUIRE(euler_residual(mink, p) < kExact * residual_scale(mink, p));
    REQUIRE(euler_residual(quartic, p) < kExact * residual_scale(quartic, p));
    const double F = eval_L_value(one_homogeneous, p);
    REQUIRE(euler_residual(one_homogeneous, p) == Catch::Approx(F).epsilon(1e-12));
  }
}

TEST_CASE("SO(3) residuals") {
  std::mt19937_64 rng(13);
  const ExprModel mink(kMinkowski), quartic(kQuartic);
  const ExprModel broken("dt^2 - dr^2 - r^2*dph^2");
  double worst_control = 0.0;
  for (int i = 0; i < 10; ++i) {
    const SamplePoint p = random_sample(rng);
    for (double v : so3_residuals(mink, p)) REQUIRE(v < 1e-7);
    const auto q = so3_residuals(quartic, p);
    for (double v : q) REQUIRE(v < 1e-7);
    REQUIRE(q[2] == 0.0);
    worst_control = std::max(worst_control, so3_residuals(broken, p)[0]);
  }
  REQUIRE(worst_control > kControl);
  REQUIRE_THROWS_AS(so3_residuals(mink, {0, 1, 1e-8, 0, 1, 0, 0, 0}), DomainError);
}

TEST_CASE("homogeneity of L") {
  std::mt19937_64 rng(14);
  const ExprModel quartic(kQuartic);
  for (int i = 0; i < 10; ++i) {
    const SamplePoint p = random_sample(rng);
    const double base = eval_L_value(quartic, p);
    for (double sigma : {0.5, 2.0, 7.0}) {
      SamplePoint q = p;
      for (double* v : {&q.dt, &q.dr, &q.dth, &q.dph}) *v *= sigma;
      REQUIRE(oracle::rel_err(eval_L_value(quartic, q), sigma * sigma * base) < 1e-10);
    }
  }
}

TEST_CASE("inadmissible and singular points") {
  const ExprModel quartic(kQuartic);
  REQUIRE_THROWS_AS(eval_L(quartic, {0, 1, 1, 0, 1, 1, 0, 0}, 2), InadmissiblePoint);
  const ExprModel degenerate("dt^2");
  REQUIRE_THROWS_AS(spray(degenerate, {0, 1, 1, 0, 1, 1, 1, 0}), SingularMetric);
}
