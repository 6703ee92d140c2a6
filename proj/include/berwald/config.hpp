#pragma once

// Run configuration: an INI-style file with [connection], [domain], [grid],
// [tolerances], [model] and [run] sections.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>

#include "berwald/classifier.hpp"
#include "berwald/connection.hpp"
#include "berwald/constructor.hpp"
#include "berwald/sample.hpp"

namespace berwald {

inline constexpr int kMinGridSide = 3;

struct GeodesicSettings {
  std::optional<SamplePoint> initial;  // absent: searched inside the model's cone
  double h = 1e-3;
  std::size_t steps = 1000;
  bool model_driven = false;  // integrate the model's spray instead of the connection
};

struct Config {
  std::string source;  // file name used in diagnostics
  std::string text;    // raw file contents
  std::array<std::string, 12> k;
  Domain domain;
  GridSpec grid;
  Tolerances tol;
  ModelOptions model;
  std::string expression;  // explicit L in place of the constructed model
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  GeodesicSettings geodesic;

  ConnectionProfile profile() const;
  // Hex SHA-256 of the raw file contents.
  std::string hash() const;
};

// Throws ConfigError with "source:line: message" locations.
Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::filesystem::path& path);

// "NTxNR", e.g. "31x41".
std::pair<int, int> parse_grid(const std::string& text);

}  // namespace berwald
