#include "berwald/app.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>

#include <json.hpp>

#include "berwald/classifier.hpp"
#include "berwald/constructor.hpp"
#include "berwald/errors.hpp"
#include "berwald/finsler.hpp"
#include "berwald/verifier.hpp"

namespace berwald {
namespace {

using Json = nlohmann::ordered_json;

// Velocity box and tries for the initial-state search of the verify command.
constexpr double kInitialBox = 0.5;
constexpr int kInitialTries = 10000;
constexpr double kInitialTheta = 1.2;
constexpr double kInitialPhi = 0.3;

// Reported as a verdict (exit 2) rather than a usage error.
class Failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json header(const std::string& command, const Config& cfg) {
  Json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["config_sha256"] = cfg.hash();
  return j;
}

Json point_json(const SamplePoint& p) {
  return Json{{"t", p.t},   {"r", p.r},   {"theta", p.th},   {"phi", p.ph},
              {"dt", p.dt}, {"dr", p.dr}, {"dtheta", p.dth}, {"dphi", p.dph}};
}

Json classification_json(const ClassificationReport& rep) {
  Json j;
  j["label"] = rep.label;
  j["base_label"] = rep.base_label;
  j["mirrored"] = rep.mirrored;
  j["grid"] = {{"nt", rep.grid.nt},
               {"nr", rep.grid.nr},
               {"inset", rep.grid.inset},
               {"random_points", rep.grid.random_points},
               {"seed", rep.grid.seed}};
  j["tolerances"] = {{"zero", rep.tolerances.zero}, {"residual", rep.tolerances.residual}};
  j["point_count"] = rep.point_count;
  Json conds = Json::array();
  for (const auto& c : rep.ledger) {
    Json e;
    e["id"] = c.id;
    e["pass"] = c.pass;
    e["applicable"] = c.applicable;
    e["max_residual"] = c.max_residual;
    e["scale"] = c.scale;
    e["tolerance"] = c.tolerance;
    e["witness"] = c.witness ? Json{{"t", c.witness->t}, {"r", c.witness->r}} : Json();
    e["note"] = c.note;
    conds.push_back(e);
  }
  j["conditions"] = conds;
  j["notes"] = rep.notes;
  return j;
}

Json construction_json(const Construction& c) {
  Json j;
  j["label"] = c.info.label;
  j["kind"] = c.info.kind;
  j["tag"] = c.model->tag();
  j["free_function"] = c.info.free_function;
  j["base_point"] = {{"t", c.info.t0}, {"r", c.info.r0}};
  Json constants = Json::object();
  for (const auto& [name, value] : c.info.constants) constants[name] = value;
  j["constants"] = constants;
  j["degenerate"] = c.info.degenerate;
  j["warnings"] = c.info.warnings;
  Json tables = Json::array();
  for (const auto& t : c.info.tables) {
    Json tt, rr;
    for (const auto& p : t.points) {
      tt.push_back(p.t);
      rr.push_back(p.r);
    }
    tables.push_back({{"name", t.name}, {"t", tt}, {"r", rr}, {"value", t.values}});
  }
  j["tables"] = tables;
  return j;
}

Json sweep_json(const VerificationReport& rep, const SweepOptions& opt) {
  Json j;
  j["model"] = rep.model;
  j["seed"] = rep.seed;
  j["samples_requested"] = opt.samples;
  j["samples"] = rep.samples;
  j["tries"] = rep.tries;
  j["acceptance_rate"] = rep.acceptance();
  j["max_condition"] = opt.max_condition;
  j["ill_conditioned"] = rep.ill_conditioned;
  j["singular"] = rep.singular;
  Json checks = Json::array();
  for (const auto& c : rep.checks) {
    Json e;
    e["name"] = c.name;
    e["pass"] = c.pass();
    e["applicable"] = c.applicable;
    e["max"] = c.max;
    e["tol"] = c.tol;
    e["samples"] = c.samples;
    e["note"] = c.note;
    Json w = Json::array();
    for (const auto& x : c.witnesses) {
      Json p = point_json(x.point);
      p["value"] = x.value;
      w.push_back(p);
    }
    e["witnesses"] = w;
    checks.push_back(e);
  }
  j["checks"] = checks;
  j["warnings"] = rep.warnings;
  j["pass"] = rep.pass();
  return j;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  body(out);
  if (!out) throw ConfigError("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

void put_number(std::ostream& out, double x) {
  if (x == 0.0) x = 0.0;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.write(buf, res.ptr - buf);
}

ClassificationReport classify_config(const Config& cfg, const ConnectionProfile& pr) {
  return classify(pr, cfg.grid, cfg.tol);
}

Construction construct_config(const Config& cfg, const ConnectionProfile& pr,
                              const ClassificationReport& rep) {
  if (!rep.constructible())
    throw Failure("the profile classifies as " + rep.label +
                  ", which admits no non-Riemannian Berwald function; nothing to construct");
  ModelOptions opt = cfg.model;
  opt.grid = cfg.grid;
  return construct(pr, rep, opt);
}

// The explicit [model] expression, or the model built for the profile's class.
struct ResolvedModel {
  ModelPtr model;
  bool degenerate = false;
  std::optional<Construction> construction;
};

ResolvedModel resolve_model(const Config& cfg, const ConnectionProfile& pr) {
  if (!cfg.expression.empty())
    return {std::make_shared<ExprModel>(cfg.expression, true, "expression"), false, {}};
  Construction c = construct_config(cfg, pr, classify_config(cfg, pr));
  ResolvedModel out{c.model, c.info.degenerate, {}};
  out.construction = std::move(c);
  return out;
}

std::optional<SamplePoint> initial_state(const Config& cfg, const FinslerModel* m) {
  if (cfg.geodesic.initial) return cfg.geodesic.initial;
  const Domain& d = cfg.domain;
  if (m == nullptr)
    return SamplePoint{d.t_center(), d.r_center(), kInitialTheta, kInitialPhi, 1, 0, 0, 0};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-kInitialBox, kInitialBox);
  for (int i = 0; i < kInitialTries; ++i) {
    const SamplePoint s{d.t_center(), d.r_center(), kInitialTheta, kInitialPhi,
                        u(rng),       u(rng),       u(rng),        u(rng)};
    if (s.speed() >= kMinSpeed && m->admissible(s)) return s;
  }
  return std::nullopt;
}

Trajectory integrate(const Config& cfg, const ConnectionProfile& pr, const FinslerModel* m,
                     const SamplePoint& s0) {
  if (cfg.geodesic.model_driven) {
    if (m == nullptr) throw Failure("a model-driven geodesic needs a model");
    return geodesic(*m, s0, cfg.geodesic.h, cfg.geodesic.steps);
  }
  return geodesic(pr, s0, cfg.geodesic.h, cfg.geodesic.steps);
}

int cmd_classify(const Config& cfg, const std::filesystem::path& out, std::ostream& log) {
  const auto rep = classify_config(cfg, cfg.profile());
  Json j = header("classify", cfg);
  const Json body = classification_json(rep);
  for (const auto& [key, value] : body.items()) j[key] = value;
  write_json(out / "report.json", j);
  log << "label: " << rep.label << '\n';
  return kExitPass;
}

int cmd_construct(const Config& cfg, const std::filesystem::path& out, std::ostream& log) {
  const auto pr = cfg.profile();
  const auto rep = classify_config(cfg, pr);
  const Construction c = construct_config(cfg, pr, rep);
  Json j = header("construct", cfg);
  j["model"] = construction_json(c);
  write_json(out / "model.json", j);
  log << "constructed " << c.model->tag() << " for " << rep.label << '\n';
  for (const auto& w : c.info.warnings) log << "warning: " << w << '\n';
  return kExitPass;
}

int cmd_verify(const Config& cfg, const std::filesystem::path& out, std::ostream& log) {
  const auto pr = cfg.profile();
  const ResolvedModel rm = resolve_model(cfg, pr);
  SweepOptions opt;
  opt.samples = cfg.samples;
  opt.seed = cfg.seed;
  opt.tol = cfg.tol.residual;
  opt.berwald_tol = cfg.tol.residual;
  opt.degenerate = rm.degenerate;
  const auto rep = residual_sweep(*rm.model, pr, opt);

  Json cons;
  bool cons_pass = true;
  const auto s0 = initial_state(cfg, rm.model.get());
  cons["h"] = cfg.geodesic.h;
  cons["steps"] = cfg.geodesic.steps;
  cons["driver"] = cfg.geodesic.model_driven ? "model" : "profile";
  cons["tol"] = kConservationTol;
  if (!s0 || !rm.model->admissible(*s0)) {
    cons["applicable"] = false;
    cons["note"] = "no admissible initial state";
  } else {
    const Trajectory traj = integrate(cfg, pr, rm.model.get(), *s0);
    const ConservationResult cr = conservation_check(*rm.model, traj);
    cons_pass = cr.ok() && cr.drift <= kConservationTol;
    cons["applicable"] = true;
    cons["initial"] = point_json(*s0);
    cons["completed"] = traj.completed;
    cons["states"] = traj.states.size();
    cons["stop_reason"] = traj.stop_reason;
    cons["drift"] = cr.drift;
    cons["worst_index"] = cr.worst_index;
    cons["inadmissible_index"] = cr.inadmissible_index ? Json(*cr.inadmissible_index) : Json();
  }
  cons["pass"] = cons_pass;

  Json j = header("verify", cfg);
  j["model"] = rm.construction ? construction_json(*rm.construction)
                               : Json{{"tag", rm.model->tag()}, {"expression", cfg.expression}};
  j["sweep"] = sweep_json(rep, opt);
  j["conservation"] = cons;
  const bool pass = rep.pass() && cons_pass;
  j["pass"] = pass;
  write_json(out / "verification.json", j);

  log << "residual sweep: " << rep.samples << " samples, " << rep.tries << " draws, "
      << rep.seconds << " s\n";
  for (const auto& c : rep.checks)
    log << "  " << c.name << ": max " << c.max << (c.pass() ? " ok" : " FAIL")
        << (c.note.empty() ? "" : " (" + c.note + ")") << '\n';
  for (const auto& w : rep.warnings) log << "warning: " << w << '\n';
  log << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kExitPass : kExitFail;
}

int cmd_geodesic(const Config& cfg, const std::filesystem::path& out, std::ostream& log) {
  const auto pr = cfg.profile();
  ModelPtr model;
  if (!cfg.expression.empty()) {
    model = resolve_model(cfg, pr).model;
  } else if (const auto rep = classify_config(cfg, pr); rep.constructible()) {
    model = construct_config(cfg, pr, rep).model;
  }
  const auto s0 = initial_state(cfg, model.get());
  if (!s0) throw Failure("no admissible initial state found; set dt, dr, dtheta, dphi in [run]");
  const Trajectory traj = integrate(cfg, pr, model.get(), *s0);
  write_file(out / "trajectory.csv",
             [&](std::ostream& o) { write_trajectory_csv(o, traj, model.get()); });
  if (!traj.completed) {
    log << "geodesic stopped: " << traj.stop_reason << '\n';
    return kExitFail;
  }
  log << "geodesic: " << traj.states.size() << " states\n";
  return kExitPass;
}

int cmd_curvature(const Config& cfg, const std::filesystem::path& out, std::ostream& log) {
  const ConnectionFields fields(cfg.profile());
  const auto pts = regular_grid(cfg.domain, cfg.grid);
  write_file(out / "curvature_grid.csv", [&](std::ostream& o) {
    bool first = true;
    for (const auto& p : pts) {
      const auto row = fields.tabulate(p.t, p.r);
      if (first) {
        o << "t,r";
        for (const auto& [name, value] : row) o << ',' << name;
        o << '\n';
        first = false;
      }
      put_number(o, p.t);
      o << ',';
      put_number(o, p.r);
      for (const auto& [name, value] : row) {
        o << ',';
        put_number(o, value);
      }
      o << '\n';
    }
  });
  log << "curvature grid: " << pts.size() << " points\n";
  return kExitPass;
}

}  // namespace

int run(const std::string& command, const Config& cfg, const std::filesystem::path& out_dir,
        std::ostream& log) {
  static const std::map<std::string, int (*)(const Config&, const std::filesystem::path&,
                                             std::ostream&)>
      commands{{"classify", cmd_classify},
               {"construct", cmd_construct},
               {"verify", cmd_verify},
               {"geodesic", cmd_geodesic},
               {"curvature", cmd_curvature}};
  const auto it = commands.find(command);
  if (it == commands.end()) {
    log << "error: unknown command '" << command
        << "' (expected classify, construct, verify, geodesic or curvature)\n";
    return kExitUsage;
  }
  const auto start = std::chrono::steady_clock::now();
  int code = kExitUsage;
  try {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create " + out_dir.string() + ": " + ec.message());
    code = it->second(cfg, out_dir, log);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SyntaxError& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    log << "fail: " << e.what() << '\n';
    return kExitFail;
  }
  log << command << " took "
      << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
      << " s\n";
  return code;
}

}  // namespace berwald
