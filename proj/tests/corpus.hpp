#pragma once

// Connection profiles with known classification, shared by the test binaries.

#include <string>
#include <vector>

#include "berwald/classifier.hpp"
#include "berwald/connection.hpp"

namespace corpus {

struct Entry {
  std::string name;
  std::array<std::string, 12> k;
  berwald::Domain domain;
  std::string label;
};

inline const berwald::Domain kUnit{0, 1, 1, 2};

inline Entry zero() { return {"zero", {}, kUnit, berwald::label::kFree2D}; }

inline Entry minkowski() {
  Entry e{"minkowski", {}, {0, 1, 1, 5}, berwald::label::kFlatBracket};
  e.k[8] = "1/r";
  e.k[9] = "-r";
  return e;
}

inline Entry power_quadratic() {
  Entry e{"power_lambda2", {}, kUnit, berwald::label::kPower};
  e.k[3] = e.k[4] = "(t+r)/5";
  e.k[5] = "-(t+r)/5";
  e.k[6] = e.k[9] = "-2*(t+r)/5";
  e.k[7] = "-(t+r)/10";
  e.k[8] = "(t+r)/10";
  return e;
}

inline Entry power_three_halves() {
  Entry e{"power_lambda1.5", {}, kUnit, berwald::label::kPower};
  e.k[0] = "(t+r)^3/100 + 3*(t+r)/20";
  e.k[1] = "-(t+r)^3/100 - (t+r)/20";
  e.k[2] = "(t+r)^3/100 - (t+r)/20";
  e.k[3] = "(t+r)^3/100 + 9*(t+r)/20";
  e.k[4] = "(t+r)^3/100 + (t+r)/4";
  e.k[5] = "-(t+r)^3/100 - 7*(t+r)/20";
  e.k[6] = e.k[9] = "-2*(t+r)/5";
  e.k[7] = "-(t+r)/10";
  e.k[8] = "(t+r)/10";
  return e;
}

inline Entry power_weyl() {
  Entry e{"power_weyl", {}, kUnit, berwald::label::kPower};
  e.k[0] = e.k[2] = e.k[5] = "-(t+r)/10";
  e.k[7] = "-1/(3-t+r) - (t+r)/20";
  e.k[8] = "1/(3-t+r) + (t+r)/20";
  e.k[6] = "((3-t+r)*exp((t+r)^2/40))^2*(-1/(3-t+r) - (t+r)/20)";
  e.k[9] = "-(((3-t+r)*exp((t+r)^2/40))^2*(1/(3-t+r) + (t+r)/20))";
  return e;
}

inline Entry exponential_constant() {
  Entry e{"exponential_mu4", {}, kUnit, berwald::label::kExponential};
  e.k[0] = "r/10";
  e.k[1] = "t/10";
  e.k[2] = "-r/10 - t/5";
  e.k[3] = "-t/10";
  e.k[4] = "-r/5 - 3*t/10";
  e.k[5] = "r/10 + t/5";
  e.k[6] = e.k[9] = "2*(t+r)/5";
  e.k[7] = "(t+r)/10";
  e.k[8] = "-(t+r)/10";
  return e;
}

inline Entry exponential_varying() {
  Entry e = exponential_constant();
  e.name = "exponential_varying";
  e.k[6] = e.k[9] = "((r+t)*(r-t+3) - 10)*(r-t+3)/10";
  e.k[7] = "((r+t)*(r-t+3)/10 - 1)/(r-t+3)";
  e.k[8] = "-((r+t)*(r-t+3)/10 - 1)/(r-t+3)";
  return e;
}

inline Entry wsector() {
  Entry e{"wsector", {}, kUnit, berwald::label::kWsector};
  e.k[3] = e.k[4] = "0.1";
  e.k[5] = "-0.1";
  e.k[6] = e.k[9] = "1 + t*r/10";
  return e;
}

inline Entry onevar_de_sitter() {
  Entry e{"onevar_ds2", {}, kUnit, berwald::label::kOneVar};
  e.k[2] = "exp(2*t)";
  e.k[5] = "1";
  return e;
}

inline Entry onevar_alternative() {
  Entry e{"onevar_alt", {}, kUnit, berwald::label::kOneVar};
  e.k[1] = "r/(1+r^2)";
  e.k[3] = "r";
  return e;
}

inline Entry schwarzschild() {
  Entry e{"schwarzschild", {}, {0, 1, 3, 10}, berwald::label::kRiemannianOnly};
  e.k[1] = "1/(r*(r-2))";
  e.k[3] = "(r-2)/r^3";
  e.k[4] = "-1/(r*(r-2))";
  e.k[8] = "1/r";
  e.k[9] = "-(r-2)";
  return e;
}

inline Entry torsion_like() {
  Entry e{"k11_nonzero", {}, kUnit, berwald::label::kNone};
  e.k[10] = "0.1";
  return e;
}

inline berwald::ConnectionProfile profile(const Entry& e) {
  return berwald::ConnectionProfile::parse(e.k, e.domain);
}

// One profile per constructible label plus the negative controls.
inline std::vector<Entry> all() {
  return {zero(),          minkowski(),          power_quadratic(),    power_three_halves(),
          power_weyl(),    exponential_constant(), exponential_varying(), wsector(),
          onevar_de_sitter(), onevar_alternative(), schwarzschild(),      torsion_like()};
}

}  // namespace corpus
