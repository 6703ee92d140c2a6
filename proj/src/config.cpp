#include "berwald/config.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "berwald/errors.hpp"
#include "berwald/expr.hpp"
#include "berwald/finsler.hpp"

namespace berwald {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Value {
  std::string text;
  bool quoted = false;
  int line = 0;
};

class Reader {
 public:
  Reader(const std::string& source) : source_(source) {}

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  double number(const std::string& key, const Value& v) const {
    if (v.quoted) fail(v.line, key + " expects a number, not a string");
    return to_double(key, v.text, v.line);
  }

  double to_double(const std::string& key, const std::string& text, int line) const {
    double out = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(out))
      fail(line, key + ": '" + text + "' is not a finite number");
    return out;
  }

  long long integer(const std::string& key, const Value& v, long long min) const {
    if (v.quoted) fail(v.line, key + " expects an integer, not a string");
    long long out = 0;
    const auto res = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
    if (res.ec != std::errc() || res.ptr != v.text.data() + v.text.size())
      fail(v.line, key + ": '" + v.text + "' is not an integer");
    if (out < min) fail(v.line, key + " must be at least " + std::to_string(min));
    return out;
  }

  std::pair<double, double> range(const std::string& key, const Value& v) const {
    if (v.quoted) fail(v.line, key + " expects two numbers 'min, max'");
    const auto comma = v.text.find(',');
    if (comma == std::string::npos) fail(v.line, key + " expects two numbers 'min, max'");
    const double lo = to_double(key, trim(v.text.substr(0, comma)), v.line);
    const double hi = to_double(key, trim(v.text.substr(comma + 1)), v.line);
    if (!(lo < hi)) fail(v.line, key + " must satisfy min < max");
    return {lo, hi};
  }

  std::string expression(const std::string& key, const Value& v, const VarSet& vars) const {
    try {
      parse(v.text, vars);
    } catch (const SyntaxError& e) {
      fail(v.line, key + ": " + e.what());
    }
    return v.text;
  }

 private:
  std::string source_;
};

using Section = std::map<std::string, Value>;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = [] {
    std::map<std::string, std::set<std::string>> k;
    for (int i = 1; i <= 12; ++i) k["connection"].insert("k" + std::to_string(i));
    k["domain"] = {"t_range", "r_range"};
    k["grid"] = {"nt", "nr"};
    k["tolerances"] = {"tol_zero", "tol_residual"};
    k["model"] = {"free_function", "t0", "r0", "p0", "orientation", "expression"};
    k["run"] = {"samples", "seed", "t",  "r",  "theta", "phi",   "dt",
                "dr",      "dtheta", "dphi", "h", "steps", "driver"};
    return k;
  }();
  return keys;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace

ConnectionProfile Config::profile() const { return ConnectionProfile::parse(k, domain); }

std::string Config::hash() const { return sha256_hex(text); }

Config parse_config(const std::string& text, const std::string& source) {
  const Reader rd(source);
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') rd.fail(line, "unterminated section header");
      current = trim(s.substr(1, s.size() - 2));
      if (!known_keys().contains(current)) rd.fail(line, "unknown section [" + current + "]");
      if (sections.contains(current)) rd.fail(line, "duplicate section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) rd.fail(line, "expected 'key = value'");
    if (current.empty()) rd.fail(line, "key outside of a section");
    const std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (!known_keys().at(current).contains(key))
      rd.fail(line, "unknown key '" + key + "' in [" + current + "]");
    Value v{value, false, line};
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') rd.fail(line, "unterminated string");
      v.text = value.substr(1, value.size() - 2);
      v.quoted = true;
    }
    if (v.text.empty()) rd.fail(line, key + " has an empty value");
    if (!sections[current].emplace(key, v).second) rd.fail(line, "duplicate key '" + key + "'");
  }

  Config cfg;
  cfg.source = source;
  cfg.text = text;
  if (!sections.contains("domain")) rd.fail(line, "missing required section [domain]");

  auto each = [&](const char* name, const std::function<void(const std::string&, const Value&)>& f) {
    if (auto it = sections.find(name); it != sections.end())
      for (const auto& [key, v] : it->second) f(key, v);
  };

  const Section& dom = sections["domain"];
  for (const char* key : {"t_range", "r_range"})
    if (!dom.contains(key)) rd.fail(line, std::string("[domain] needs ") + key);
  std::tie(cfg.domain.t_min, cfg.domain.t_max) = rd.range("t_range", dom.at("t_range"));
  std::tie(cfg.domain.r_min, cfg.domain.r_max) = rd.range("r_range", dom.at("r_range"));

  each("connection", [&](const std::string& key, const Value& v) {
    cfg.k[std::stoi(key.substr(1)) - 1] = rd.expression(key, v, coordinate_vars());
  });
  each("grid", [&](const std::string& key, const Value& v) {
    const int n = static_cast<int>(rd.integer(key, v, kMinGridSide));
    (key == "nt" ? cfg.grid.nt : cfg.grid.nr) = n;
  });
  each("tolerances", [&](const std::string& key, const Value& v) {
    const double x = rd.number(key, v);
    if (!(x > 0)) rd.fail(v.line, key + " must be positive");
    (key == "tol_zero" ? cfg.tol.zero : cfg.tol.residual) = x;
  });
  each("model", [&](const std::string& key, const Value& v) {
    if (key == "free_function")
      cfg.model.free_function = rd.expression(key, v, VarSet{"q", "z", "dt", "dr", "w"});
    else if (key == "expression")
      cfg.expression = rd.expression(key, v, ExprModel::vars());
    else if (key == "t0")
      cfg.model.t0 = rd.number(key, v);
    else if (key == "r0")
      cfg.model.r0 = rd.number(key, v);
    else if (key == "p0")
      cfg.model.p0 = rd.number(key, v);
    else {
      const long long o = rd.integer(key, v, -1);
      if (o != 1 && o != -1) rd.fail(v.line, "orientation must be 1 or -1");
      cfg.model.orientation = static_cast<int>(o);
    }
  });

  std::map<std::string, double> initial;
  int initial_line = 0;
  each("run", [&](const std::string& key, const Value& v) {
    if (key == "samples")
      cfg.samples = static_cast<std::size_t>(rd.integer(key, v, 1));
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(rd.integer(key, v, 0));
    else if (key == "steps")
      cfg.geodesic.steps = static_cast<std::size_t>(rd.integer(key, v, 1));
    else if (key == "h") {
      cfg.geodesic.h = rd.number(key, v);
      if (!(cfg.geodesic.h > 0)) rd.fail(v.line, "h must be positive");
    } else if (key == "driver") {
      if (v.text != "profile" && v.text != "model")
        rd.fail(v.line, "driver must be 'profile' or 'model'");
      cfg.geodesic.model_driven = v.text == "model";
    } else {
      initial[key] = rd.number(key, v);
      if (initial_line == 0 || v.line < initial_line) initial_line = v.line;
    }
  });
  if (!initial.empty()) {
    for (const char* key : {"dt", "dr", "dtheta", "dphi"})
      if (!initial.contains(key))
        rd.fail(initial_line, "initial data needs dt, dr, dtheta and dphi (missing " + std::string(key) + ")");
    auto get = [&](const char* key, double fallback) {
      auto it = initial.find(key);
      return it == initial.end() ? fallback : it->second;
    };
    cfg.geodesic.initial = SamplePoint{get("t", cfg.domain.t_center()),
                                       get("r", cfg.domain.r_center()),
                                       get("theta", std::numbers::pi / 2),
                                       get("phi", 0.0),
                                       initial["dt"],
                                       initial["dr"],
                                       initial["dtheta"],
                                       initial["dphi"]};
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::pair<int, int> parse_grid(const std::string& text) {
  const auto x = text.find('x');
  int nt = 0, nr = 0;
  auto read = [](std::string_view s, int& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
  };
  const std::string_view sv(text);
  if (x == std::string::npos || !read(sv.substr(0, x), nt) || !read(sv.substr(x + 1), nr))
    throw ConfigError("--grid expects NTxNR, got '" + text + "'");
  if (nt < kMinGridSide || nr < kMinGridSide)
    throw ConfigError("--grid sides must be at least " + std::to_string(kMinGridSide));
  return {nt, nr};
}

}  // namespace berwald
