#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "berwald/app.hpp"
#include "berwald/config.hpp"
#include "berwald/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Classify spherically symmetric connections and build Berwald metrics", "berwald"};
  app.set_version_flag("--version", std::string(berwald::kToolVersion));

  std::string command, config_path, out_dir = ".", grid;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  app.add_option("command", command, "classify | construct | verify | geodesic | curvature")
      ->required()
      ->check(CLI::IsMember({"classify", "construct", "verify", "geodesic", "curvature"}));
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--samples", samples, "residual sweep sample count")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "sampling seed");
  app.add_option("--tol", tol, "residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--grid", grid, "classification grid NTxNR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? berwald::kExitPass : berwald::kExitUsage;
  }

  try {
    berwald::Config cfg = berwald::load_config(config_path);
    if (samples) cfg.samples = *samples;
    if (seed) cfg.seed = *seed;
    if (tol) cfg.tol.residual = *tol;
    if (!grid.empty()) std::tie(cfg.grid.nt, cfg.grid.nr) = berwald::parse_grid(grid);
    return berwald::run(command, cfg, out_dir, std::cerr);
  } catch (const berwald::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return berwald::kExitUsage;
  }
}
