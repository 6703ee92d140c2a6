#include <catch_amalgamated.hpp>

#include <string>

#include "berwald/config.hpp"
#include "berwald/errors.hpp"

using namespace berwald;

namespace {

const char* const kMinimal = "[domain]\nt_range = 0, 1\nr_range = 1, 2\n";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config loads with defaults") {
  const Config cfg = parse_config(kMinimal);
  for (const auto& k : cfg.k) REQUIRE(k.empty());
  REQUIRE(cfg.domain.t_min == 0);
  REQUIRE(cfg.domain.r_max == 2);
  REQUIRE(cfg.grid.nt == 21);
  REQUIRE(cfg.grid.nr == 21);
  REQUIRE(cfg.samples == 200);
  REQUIRE_FALSE(cfg.geodesic.initial.has_value());
  REQUIRE(classify(cfg.profile(), cfg.grid, cfg.tol).label == label::kFree2D);
}

TEST_CASE("Minkowski profile loads from a config") {
  const Config cfg = parse_config(
      "# flat\n[connection]\nk9 = \"1/r\"\nk10 = \"-r\"\n\n[domain]\nt_range = 0, 1\n"
      "r_range = 1, 5\n");
  REQUIRE(cfg.k[8] == "1/r");
  REQUIRE(cfg.k[9] == "-r");
  const auto pr = cfg.profile();
  REQUIRE(pr.values(0.5, 2.0)[8] == Catch::Approx(0.5));
  REQUIRE(pr.values(0.5, 2.0)[9] == Catch::Approx(-2.0));
  REQUIRE(classify(pr, cfg.grid, cfg.tol).label == label::kFlatBracket);
}

TEST_CASE("every section is read") {
  const Config cfg = parse_config(
      "[connection]\nk3 = 0.5\n[domain]\nt_range = -1, 1\nr_range = 2, 3\n"
      "[grid]\nnt = 5\nnr = 7\n[tolerances]\ntol_zero = 1e-10\ntol_residual = 1e-6\n"
      "[model]\nfree_function = \"q^2 + 1\"\nt0 = 0.1\nr0 = 2.5\np0 = 0.2\norientation = -1\n"
      "[run]\nsamples = 50\nseed = 9\ndt = 1\ndr = 0.5\ndtheta = 0\ndphi = 0.1\nr = 2.2\n"
      "h = 0.01\nsteps = 20\ndriver = model\n");
  REQUIRE(cfg.k[2] == "0.5");
  REQUIRE(cfg.domain.t_min == -1);
  REQUIRE(cfg.grid.nt == 5);
  REQUIRE(cfg.grid.nr == 7);
  REQUIRE(cfg.tol.zero == 1e-10);
  REQUIRE(cfg.tol.residual == 1e-6);
  REQUIRE(cfg.model.free_function == "q^2 + 1");
  REQUIRE(cfg.model.t0 == 0.1);
  REQUIRE(cfg.model.r0 == 2.5);
  REQUIRE(cfg.model.p0 == 0.2);
  REQUIRE(cfg.model.orientation == -1);
  REQUIRE(cfg.samples == 50);
  REQUIRE(cfg.seed == 9);
  REQUIRE(cfg.geodesic.h == 0.01);
  REQUIRE(cfg.geodesic.steps == 20);
  REQUIRE(cfg.geodesic.model_driven);
  const SamplePoint s = *cfg.geodesic.initial;
  REQUIRE(s.t == 0);
  REQUIRE(s.r == 2.2);
  REQUIRE(s.dr == 0.5);
  REQUIRE(s.dph == 0.1);
}

TEST_CASE("expression errors carry line and offset") {
  const std::string err =
      error_of("[connection]\nk7 = \"sin(\"\n[domain]\nt_range = 0, 1\nr_range = 1, 2\n");
  REQUIRE(err.find("test.ini:2:") == 0);
  REQUIRE(err.find("k7") != std::string::npos);
  REQUIRE(err.find("offset 4") != std::string::npos);
}

TEST_CASE("unknown keys and sections are rejected with their location") {
  REQUIRE(error_of(std::string(kMinimal) + "foo = 1\n") ==
          "test.ini:4: unknown key 'foo' in [domain]");
  REQUIRE(error_of(std::string("[extras]\n") + kMinimal) == "test.ini:1: unknown section [extras]");
  REQUIRE(error_of(std::string("[connection]\nk13 = 1\n") + kMinimal).find("test.ini:2:") == 0);
}

TEST_CASE("structural errors") {
  REQUIRE(error_of("[connection]\nk1 = 1\n").find("missing required section [domain]") !=
          std::string::npos);
  REQUIRE(error_of("[domain]\nt_range = 0, 1\n").find("r_range") != std::string::npos);
  REQUIRE(error_of("t_range = 0, 1\n").find("outside of a section") != std::string::npos);
  REQUIRE(error_of("[domain\n").find("unterminated section") != std::string::npos);
  REQUIRE(error_of(std::string(kMinimal) + "t_range = 0, 2\n").find("duplicate key") !=
          std::string::npos);
  REQUIRE(error_of(std::string(kMinimal) + "[domain]\n").find("duplicate section") !=
          std::string::npos);
  REQUIRE(error_of("[domain]\nt_range\n").find("expected 'key = value'") != std::string::npos);
  REQUIRE(error_of("[connection]\nk1 = \"t\n" + std::string(kMinimal)).find("unterminated string") !=
          std::string::npos);
}

TEST_CASE("value validation") {
  REQUIRE(error_of("[domain]\nt_range = 1, 1\nr_range = 1, 2\n").find("min < max") !=
          std::string::npos);
  REQUIRE(error_of("[domain]\nt_range = 0\nr_range = 1, 2\n").find("two numbers") !=
          std::string::npos);
  REQUIRE(error_of("[domain]\nt_range = 0, x\nr_range = 1, 2\n").find("not a finite number") !=
          std::string::npos);
  REQUIRE(error_of(std::string(kMinimal) + "[grid]\nnt = 2\n").find("at least 3") !=
          std::string::npos);
  REQUIRE(error_of(std::string(kMinimal) + "[grid]\nnr = 4.5\n").find("not an integer") !=
          std::string::npos);
  REQUIRE(error_of(std::string(kMinimal) + "[tolerances]\ntol_zero = 0\n").find("positive") !=
          std::string::npos);
  REQUIRE(error_of(std::string(kMinimal) + "[model]\norientation = 0\n").find("1 or -1") !=
          std::string::npos);
  REQUIRE(error_of(std::string(kMinimal) + "[run]\ndriver = spray\n").find("driver") !=
          std::string::npos);
  REQUIRE(error_of(std::string(kMinimal) + "[run]\nsamples = \"10\"\n").find("not a string") !=
          std::string::npos);
  REQUIRE(error_of(std::string(kMinimal) + "[run]\ndt = 1\ndr = 0\n").find("missing dtheta") !=
          std::string::npos);
  REQUIRE(error_of(std::string(kMinimal) + "[model]\nexpression = \"dt^2 + foo\"\n")
              .find("expression") != std::string::npos);
}

TEST_CASE("config hash follows the file bytes") {
  const Config a = parse_config(kMinimal);
  const Config b = parse_config(kMinimal);
  const Config c = parse_config(std::string(kMinimal) + "# comment\n");
  REQUIRE(a.hash().size() == 64);
  REQUIRE(a.hash() == b.hash());
  REQUIRE(a.hash() != c.hash());
}

TEST_CASE("empty-string SHA-256 matches the published digest") {
  Config cfg;
  REQUIRE(cfg.hash() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("grid flag parsing") {
  REQUIRE(parse_grid("31x41") == std::pair{31, 41});
  REQUIRE_THROWS_AS(parse_grid("31"), ConfigError);
  REQUIRE_THROWS_AS(parse_grid("2x10"), ConfigError);
  REQUIRE_THROWS_AS(parse_grid("ax3"), ConfigError);
}

TEST_CASE("missing files are reported") {
  REQUIRE_THROWS_AS(load_config("/nonexistent/berwald.ini"), ConfigError);
}
