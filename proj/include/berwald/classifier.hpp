#pragma once

// Decides which Berwald-metrizability class a spherically symmetric
// connection falls into, recording every condition it consults.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "berwald/connection.hpp"

namespace berwald {

struct Tolerances {
  double zero = 1e-9;      // grid zero test, relative to 1 + term magnitude
  double residual = 1e-7;  // verification residuals, analytic channel
};

struct GridSpec {
  int nt = 21;
  int nr = 21;
  double inset = 0.01;     // fraction of each side trimmed from the boundary
  int random_points = 50;  // off-grid confirmation batch
  std::uint64_t seed = 20240611;
};

struct GridPoint {
  double t, r;
};

std::vector<GridPoint> grid_points(const Domain& d, const GridSpec& g);
// The regular part of the grid only, without the random batch.
std::vector<GridPoint> regular_grid(const Domain& d, const GridSpec& g);

struct ConditionEntry {
  std::string id;
  double max_residual = 0;
  double scale = 0;  // largest term magnitude seen
  double tolerance = 0;
  bool pass = true;
  bool applicable = true;
  std::optional<GridPoint> witness;
  std::string note;
};

namespace label {
inline constexpr const char* kPower = "T1-power";
inline constexpr const char* kExponential = "T1-exponential";
inline constexpr const char* kWsector = "T1-wsector";
inline constexpr const char* kFlatBracket = "T1-flatbracket";
inline constexpr const char* kFree2D = "T2-free2D";
inline constexpr const char* kOneVar = "T2-onevar";
inline constexpr const char* kRiemannianOnly = "riemannian-only";
inline constexpr const char* kNone = "none";
}  // namespace label

struct ClassificationReport {
  std::string label;       // possibly wrapped as mirrored(...)
  std::string base_label;  // label of the (possibly swapped) profile
  bool mirrored = false;
  std::vector<ConditionEntry> ledger;
  std::vector<std::string> notes;
  Tolerances tolerances;
  GridSpec grid;
  std::size_t point_count = 0;

  const ConditionEntry* find(const std::string& id) const;
  // True for the six non-Riemannian classes.
  bool constructible() const;
};

// Individual gates, each returning its ledger entries.
std::vector<ConditionEntry> check_k11_k12(const ConnectionProfile& pr, const GridSpec& g,
                                          const Tolerances& tol);
std::vector<ConditionEntry> check_dw_proportionality(const ConnectionProfile& pr,
                                                     const GridSpec& g, const Tolerances& tol);
std::vector<ConditionEntry> check_ABC(const ConnectionProfile& pr, const GridSpec& g,
                                      const Tolerances& tol);
std::vector<ConditionEntry> check_iterated_brackets(const ConnectionProfile& pr,
                                                    const GridSpec& g, const Tolerances& tol);

ClassificationReport classify(const ConnectionProfile& pr, const GridSpec& g = {},
                              const Tolerances& tol = {});

bool all_pass(const std::vector<ConditionEntry>& entries);

}  // namespace berwald
