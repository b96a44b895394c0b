#include "cli/run_config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "pgflow/attraction_domain.hpp"
#include "pgflow/essential.hpp"
#include "pgflow/expr.hpp"

namespace pgflow::cli {
namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) throw ConfigError(what);
  throw ConfigError(what, m.line + 1, m.column + 1);
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const char* where) {
  if (!map.IsMap()) fail(map, std::string(where) + " must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T scalar(const YAML::Node& node, const char* what) {
  if (!node.IsScalar()) fail(node, std::string(what) + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, std::string("invalid value for ") + what);
  }
}

double positive(const YAML::Node& node, const char* what) {
  const double v = scalar<double>(node, what);
  if (!(v > 0.0)) fail(node, std::string(what) + " must be positive");
  return v;
}

std::string one_of(const YAML::Node& node, const char* what, const std::set<std::string>& options) {
  const auto v = scalar<std::string>(node, what);
  if (!options.count(v)) fail(node, "unknown " + std::string(what) + " '" + v + "'");
  return v;
}

ProblemSpec parse_problem(const YAML::Node& node) {
  ProblemSpec spec;
  if (node.IsScalar()) {
    spec.builtin = one_of(node, "builtin problem", {"example1", "example2", "unbounded"});
    return spec;
  }
  check_keys(node, {"n", "objective", "constraints"}, "problem");
  if (!node["n"] || !node["objective"]) fail(node, "inline problem needs n and objective");
  const long n = scalar<long>(node["n"], "n");
  if (n <= 0) fail(node["n"], "n must be positive");
  spec.n = static_cast<Index>(n);
  spec.objective = scalar<std::string>(node["objective"], "objective");
  if (const auto cs = node["constraints"]) {
    if (!cs.IsSequence()) fail(cs, "constraints must be a list of expressions");
    for (const auto& c : cs) spec.constraints.push_back(scalar<std::string>(c, "constraint"));
  }
  return spec;
}

GainSpec parse_gain(const YAML::Node& node) {
  GainSpec g;
  if (node.IsScalar()) {
    g.type = one_of(node, "gain", {"identity", "scalar", "adaptive", "pinv"});
    return g;
  }
  check_keys(node, {"type", "q", "k", "floor", "refresh_every"}, "gain");
  if (!node["type"]) fail(node, "gain needs a type");
  g.type = one_of(node["type"], "gain", {"identity", "scalar", "adaptive", "pinv"});
  if (node["q"]) g.q = positive(node["q"], "q");
  if (node["k"]) g.k = positive(node["k"], "k");
  if (node["floor"]) g.floor = positive(node["floor"], "floor");
  if (node["refresh_every"]) {
    const long r = scalar<long>(node["refresh_every"], "refresh_every");
    if (r < 0) fail(node["refresh_every"], "refresh_every must be nonnegative");
    g.refresh_every = static_cast<std::size_t>(r);
  }
  return g;
}

void parse_integrator(const YAML::Node& node, RKSettings& s) {
  check_keys(node,
             {"rel_tol", "abs_tol", "h_init", "h_min", "h_max", "t_max", "stall_speed",
              "stall_duration", "max_steps"},
             "integrator");
  auto set = [&](const char* key, double& field) {
    if (node[key]) field = positive(node[key], key);
  };
  set("rel_tol", s.rel_tol);
  set("abs_tol", s.abs_tol);
  set("h_init", s.h_init);
  set("h_min", s.h_min);
  set("h_max", s.h_max);
  set("t_max", s.t_max);
  set("stall_speed", s.stall_speed);
  set("stall_duration", s.stall_duration);
  if (node["max_steps"]) {
    const long m = scalar<long>(node["max_steps"], "max_steps");
    if (m <= 0) fail(node["max_steps"], "max_steps must be positive");
    s.max_steps = static_cast<std::size_t>(m);
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& ex) {
    fail(node, ex.what());
  }
}

std::vector<double> parse_vector(const YAML::Node& node, const char* what) {
  if (!node.IsSequence()) fail(node, std::string(what) + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& v : node) out.push_back(scalar<double>(v, what));
  return out;
}

std::string rho_text(const YAML::Node& node) {
  const auto v = scalar<std::string>(node, "rho");
  if (v == "gain") return v;
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || ptr != v.data() + v.size() || !(d > 0.0)) {
    fail(node, "rho must be a positive number or 'gain'");
  }
  return v;
}

double to_double(const std::string& text, const char* what) {
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string("invalid ") + what + " '" + text + "'");
  }
  return d;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& ex) {
    throw ConfigError(ex.msg, ex.mark.line + 1, ex.mark.column + 1);
  }
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping");
  check_keys(root,
             {"problem", "x0", "mode", "rho", "projector", "delta", "gamma", "eps", "mu",
              "condition_cap", "gain", "integrator", "outputs", "seed"},
             "configuration");

  RunConfig cfg;
  if (!root["problem"]) throw ConfigError("missing 'problem'");
  cfg.problem = parse_problem(root["problem"]);
  if (root["x0"]) cfg.x0 = parse_vector(root["x0"], "x0");
  if (root["mode"]) cfg.mode = one_of(root["mode"], "mode", {"feasible", "modified"});
  if (root["rho"]) cfg.rho = rho_text(root["rho"]);
  if (root["projector"]) {
    cfg.projector = one_of(root["projector"], "projector", {"naive", "ridge", "recursive"});
  }
  if (root["delta"]) cfg.delta = one_of(root["delta"], "delta", {"smoothed", "exact"});
  if (root["gamma"]) cfg.gamma = positive(root["gamma"], "gamma");
  if (root["eps"]) cfg.eps = positive(root["eps"], "eps");
  if (root["mu"]) {
    cfg.mu = scalar<double>(root["mu"], "mu");
    if (*cfg.mu < 0.0) fail(root["mu"], "mu must be nonnegative");
  }
  if (root["condition_cap"]) cfg.condition_cap = positive(root["condition_cap"], "condition_cap");
  if (root["gain"]) cfg.gain = parse_gain(root["gain"]);
  if (root["integrator"]) parse_integrator(root["integrator"], cfg.integrator);
  if (const auto out = root["outputs"]) {
    check_keys(out, {"trajectory", "summary", "svg"}, "outputs");
    if (out["trajectory"]) cfg.trajectory_path = scalar<std::string>(out["trajectory"], "trajectory");
    if (out["summary"]) cfg.summary_path = scalar<std::string>(out["summary"], "summary");
    if (out["svg"]) cfg.svg_path = scalar<std::string>(out["svg"], "svg");
  }
  if (root["seed"]) cfg.seed = scalar<std::uint64_t>(root["seed"], "seed");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.out) cfg.trajectory_path = *o.out;
  if (o.summary) cfg.summary_path = *o.summary;
  if (o.svg) cfg.svg_path = *o.svg;
  if (o.seed) cfg.seed = *o.seed;
  if (o.tmax) cfg.integrator.t_max = *o.tmax;
  if (o.rtol) cfg.integrator.rel_tol = *o.rtol;
  if (o.atol) cfg.integrator.abs_tol = *o.atol;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.rho) {
    if (*o.rho != "gain" && !(to_double(*o.rho, "rho") > 0.0)) {
      throw ConfigError("rho must be a positive number or 'gain'");
    }
    cfg.rho = *o.rho;
  }
  if (o.mu) cfg.mu = *o.mu;
  if (o.eps) cfg.eps = *o.eps;
  if (o.projector) {
    if (*o.projector != "naive" && *o.projector != "ridge" && *o.projector != "recursive") {
      throw ConfigError("unknown projector '" + *o.projector + "'");
    }
    cfg.projector = *o.projector;
  }
  if (o.gain) {
    const auto eq = o.gain->find('=');
    const std::string name = o.gain->substr(0, eq);
    if (name != "identity" && name != "scalar" && name != "adaptive" && name != "pinv") {
      throw ConfigError("unknown gain '" + name + "'");
    }
    if (name != cfg.gain.type) cfg.gain = GainSpec{name, {}, {}, {}, {}};
    if (eq != std::string::npos) {
      const double value = to_double(o.gain->substr(eq + 1), "gain parameter");
      if (name == "scalar") cfg.gain.q = value;
      else if (name == "adaptive") cfg.gain.k = value;
      else if (name == "pinv") cfg.mu = value;
      else throw ConfigError("identity gain takes no parameter");
    }
  }
  if (o.x0) cfg.x0 = *o.x0;
  try {
    cfg.integrator.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
}

namespace {

ProjectorMethod projector_method(const RunConfig& cfg, const std::string& fallback,
                                 double fallback_gamma) {
  const std::string name = cfg.projector.value_or(fallback);
  if (name == "naive") {
    NaiveMethod m;
    if (cfg.condition_cap) m.condition_cap = *cfg.condition_cap;
    return m;
  }
  if (name == "ridge") return RidgeMethod{cfg.eps.value_or(1e-8)};
  if (cfg.delta.value_or("smoothed") == "exact") return RecursiveMethod{DeltaFn::exact()};
  return RecursiveMethod{DeltaFn::smoothed(cfg.gamma.value_or(fallback_gamma))};
}

GainStrategy gain_strategy(const RunConfig& cfg, const GainSpec& fallback) {
  const GainSpec& g = cfg.gain.type.empty() ? fallback : cfg.gain;
  const bool same = g.type == fallback.type;
  if (g.type == "identity") return IdentityGain{};
  if (g.type == "scalar") return ScalarGain{g.q.value_or(same && fallback.q ? *fallback.q : 1.0)};
  if (g.type == "adaptive") {
    AdaptiveGain a;
    if (same && fallback.k) a.k = *fallback.k;
    if (same && fallback.floor) a.floor = *fallback.floor;
    if (g.k) a.k = *g.k;
    if (g.floor) a.floor = *g.floor;
    return a;
  }
  PinvConditionerGain p;
  if (same && fallback.refresh_every) p.refresh_every = *fallback.refresh_every;
  if (g.refresh_every) p.refresh_every = *g.refresh_every;
  p.mu = cfg.mu.value_or(p.mu);
  p.eps = cfg.eps.value_or(p.eps);
  return p;
}

FlowMode flow_mode(const RunConfig& cfg, const std::string& fallback_mode,
                   const std::string& fallback_rho) {
  if (cfg.mode.value_or(fallback_mode) == "feasible") return FeasibleMode{};
  const std::string rho = cfg.rho.value_or(fallback_rho);
  if (rho == "gain") return ModifiedMode{1.0, true};
  return ModifiedMode{to_double(rho, "rho"), false};
}

Vector start_point(const RunConfig& cfg, Index n, std::optional<Vector> fallback) {
  if (cfg.x0) {
    if (static_cast<Index>(cfg.x0->size()) != n) {
      throw ConfigError("x0 has " + std::to_string(cfg.x0->size()) + " entries, expected " +
                        std::to_string(n));
    }
    return Eigen::Map<const Vector>(cfg.x0->data(), n);
  }
  if (!fallback) throw ConfigError("x0 is required for this problem");
  return *fallback;
}

}  // namespace

ResolvedRun resolve(const RunConfig& cfg) {
  ResolvedRun r;
  const std::string& name = cfg.problem.builtin;

  if (name == "example2") {
    if (cfg.mode.value_or("feasible") != "feasible" || cfg.projector) {
      throw ConfigError("example2 uses its own manifold tangent map; mode and projector are fixed");
    }
    using namespace essential;
    const Example2Data d = example2_data();
    const EssentialModel model(build_A(generate_correspondences(d.points, d.T_true, d.R_true)));
    const GainSpec fallback{"pinv", {}, {}, {}, std::size_t{1}};
    if (!cfg.gain.type.empty() && cfg.gain.type != "pinv") {
      throw ConfigError("example2 requires the pinv gain");
    }
    const auto gain = std::get<PinvConditionerGain>(gain_strategy(cfg, fallback));
    r.problem = model.problem();
    r.x0 = start_point(cfg, 12, pack(d.start));
    r.field.emplace(essential_flow(model, gain.mu, gain.eps, gain.refresh_every));
    r.flow = r.field->config();
    return r;
  }

  std::string fallback_mode = "feasible";
  std::string fallback_rho = "1";
  std::string fallback_projector = "recursive";
  double fallback_gamma = 30.0;
  GainSpec fallback_gain{"identity", {}, {}, {}, {}};
  std::optional<Vector> fallback_x0;

  if (name == "example1") {
    r.problem = attraction::example1_problem();
    fallback_mode = "modified";
    fallback_rho = "gain";
    fallback_gamma = 10.0;
    fallback_gain = {"adaptive", {}, 20.0, attraction::kDefaultGainFloor, {}};
    fallback_x0 = Vector{{-3.0, 1.0}};
  } else if (name == "unbounded") {
    r.problem = unbounded_linear_problem();
    fallback_x0 = Vector{{0.0, 0.0}};
  } else {
    r.problem = expr::make_problem(cfg.problem.n, cfg.problem.objective, cfg.problem.constraints);
  }

  r.x0 = start_point(cfg, r.problem.n, fallback_x0);
  r.flow.mode = flow_mode(cfg, fallback_mode, fallback_rho);
  r.flow.projector = projector_method(cfg, fallback_projector, fallback_gamma);
  r.flow.gain = gain_strategy(cfg, fallback_gain);
  try {
    r.field.emplace(r.problem, r.flow);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  return r;
}

}  // namespace pgflow::cli
