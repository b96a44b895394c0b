#include "cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include "cli/report.hpp"
#include "pgflow/attraction_domain.hpp"
#include "pgflow/benchmark.hpp"
#include "pgflow/essential.hpp"
#include "pgflow/solver.hpp"

namespace pgflow::cli {

int exit_code(Termination t) {
  switch (t) {
    case Termination::stalled: return kStalled;
    case Termination::field_error: return kFieldError;
    case Termination::time_exhausted:
    case Termination::step_limit: return kExhausted;
  }
  return kExhausted;
}

namespace {

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kConfigError;
  }
}

std::string format_vector(const Vector& x, int digits = 6) {
  std::string s = "[";
  char buf[40];
  for (Index i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.*g", i ? ", " : "", digits, x(i));
    s += buf;
  }
  return s + "]";
}

nlohmann::json describe(const FlowConfig& cfg) {
  nlohmann::json j;
  if (const auto* m = std::get_if<ModifiedMode>(&cfg.mode)) {
    j["mode"] = "modified";
    j["rho"] = m->rho_follows_gain ? nlohmann::json("gain") : nlohmann::json(m->rho);
  } else {
    j["mode"] = "feasible";
  }
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NaiveMethod>) {
          j["projector"] = {{"type", "naive"}, {"condition_cap", p.condition_cap}};
        } else if constexpr (std::is_same_v<P, RidgeMethod>) {
          j["projector"] = {{"type", "ridge"}, {"eps", p.eps}};
        } else if (p.delta.kind == DeltaFn::Kind::exact) {
          j["projector"] = {{"type", "recursive"}, {"delta", "exact"}};
        } else {
          j["projector"] = {{"type", "recursive"}, {"delta", "smoothed"}, {"gamma", p.delta.gamma}};
        }
      },
      cfg.projector);
  std::visit(
      [&](const auto& g) {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, IdentityGain>) {
          j["gain"] = {{"type", "identity"}};
        } else if constexpr (std::is_same_v<G, ScalarGain>) {
          j["gain"] = {{"type", "scalar"}, {"q", g.q}};
        } else if constexpr (std::is_same_v<G, AdaptiveGain>) {
          j["gain"] = {{"type", "adaptive"}, {"k", g.k}, {"floor", g.floor}};
        } else {
          j["gain"] = {{"type", "pinv"},
                       {"mu", g.mu},
                       {"eps", g.eps},
                       {"refresh_every", g.refresh_every}};
        }
      },
      cfg.gain);
  return j;
}

nlohmann::json describe(const RKSettings& s) {
  return {{"rel_tol", s.rel_tol},       {"abs_tol", s.abs_tol},   {"h_init", s.h_init},
          {"h_min", s.h_min},           {"h_max", s.h_max},       {"t_max", s.t_max},
          {"stall_speed", s.stall_speed}, {"stall_duration", s.stall_duration},
          {"max_steps", s.max_steps}};
}

struct Outcome {
  FlowRun run;
  std::optional<OptimalityReport> report;
  nlohmann::json summary;
};

Outcome execute(const RunConfig& cfg) {
  ResolvedRun r = resolve(cfg);
  Outcome o;
  o.run = run_field(*r.field, r.x0, cfg.integrator);
  try {
    o.report = kkt_report(r.problem, o.run.trajectory.final().x);
  } catch (const std::exception&) {
    o.report.reset();
  }
  o.summary = trajectory_summary(o.run.trajectory);
  o.summary["problem"] = cfg.problem.builtin.empty() ? "inline" : cfg.problem.builtin;
  o.summary["x0"] = to_json(r.x0);
  o.summary["seed"] = cfg.seed;
  o.summary["flow"] = describe(r.flow);
  o.summary["integrator"] = describe(cfg.integrator);
  o.summary["optimality"] = o.report ? to_json(*o.report) : nlohmann::json(nullptr);
  o.summary["wall_seconds"] = o.run.wall_seconds;
  return o;
}

std::string trajectory_svg(const Trajectory& traj, const std::string& title) {
  Series v{"v", {}, {}}, c{"c_norm", {}, {}}, gap{"stationarity gap", {}, {}};
  for (const Sample& s : traj.samples) {
    for (Series* ser : {&v, &c, &gap}) ser->x.push_back(s.t);
    v.y.push_back(std::abs(s.metrics.v));
    c.y.push_back(s.metrics.c_norm);
    gap.y.push_back(s.metrics.stationarity_gap);
  }
  return svg_line_chart({v, c, gap}, title, "t", "log10 value", true);
}

void write_outputs(const Outcome& o, const std::string& csv, const std::string& summary,
                   const std::string& svg, const std::string& title) {
  if (!csv.empty()) {
    std::ostringstream ss;
    write_trajectory_csv(ss, o.run.trajectory);
    write_file(csv, ss.str());
  }
  if (!summary.empty()) write_file(summary, o.summary.dump(2) + "\n");
  if (!svg.empty()) write_file(svg, trajectory_svg(o.run.trajectory, title));
}

void print_outcome(std::ostream& out, const Outcome& o) {
  const Trajectory& t = o.run.trajectory;
  const Sample& last = t.final();
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s at t=%.6g: v=%.8g c_norm=%.3g steps=%zu/%zu wall=%.3fs",
                to_string(t.termination), last.t, last.metrics.v, last.metrics.c_norm,
                t.accepted_steps, t.rejected_steps, o.run.wall_seconds);
  out << buf << "\n  x = " << format_vector(last.x) << '\n';
  if (t.failure) {
    out << "  failure at " << format_vector(t.failure->x) << ": " << t.failure->message << '\n';
  }
}

/// path with "_<i>" inserted before the extension.
std::string indexed_path(const std::string& path, std::size_t i) {
  if (path.empty()) return path;
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  const std::string tag = "_" + std::to_string(i);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

}  // namespace

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Outcome o = execute(cfg);
    write_outputs(o, cfg.trajectory_path, cfg.summary_path, cfg.svg_path, "trajectory");
    print_outcome(out, o);
    return exit_code(o.run.trajectory.termination);
  });
}

int cmd_run(const std::string& config_path, const Overrides& ov, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load_config(config_path);
    apply_overrides(cfg, ov);
    return cmd_run(cfg, out, err);
  });
}

int cmd_check(const std::string& config_path, const Overrides& ov, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load_config(config_path);
    apply_overrides(cfg, ov);
    const ResolvedRun r = resolve(cfg);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> offset(-1.0, 1.0);
    std::vector<Vector> points{r.x0};
    for (int k = 0; k < 10; ++k) {
      Vector x = r.x0;
      for (Index i = 0; i < x.size(); ++i) x(i) += offset(rng);
      points.push_back(x);
    }

    constexpr double kTolerance = 1e-4;
    double worst = -1.0;
    std::string where;
    for (const Vector& x : points) {
      const GradientReport rep = check_gradients(r.problem, x, 1e-6);
      if (rep.max_error() > worst) {
        worst = rep.max_error();
        const auto& w = rep.worst_index;
        where = (w.source == GradientReport::Source::objective
                     ? "dv/dx" + std::to_string(w.row + 1)
                     : "dc" + std::to_string(w.col + 1) + "/dx" + std::to_string(w.row + 1)) +
                " at x = " + format_vector(x, 17);
      }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", worst);
    if (worst > kTolerance) {
      err << "error: gradient check failed: error " << buf << " in " << where << '\n';
      return static_cast<int>(kConfigError);
    }
    out << "gradient check passed at " << points.size() << " points (max error " << buf
        << ")\n";
    return static_cast<int>(kStalled);
  });
}

int cmd_projection_bench(const Overrides& ov, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProjectionSweep sweep = projection_sweep(dependent_gradient_triple());

    std::ostringstream text;
    text << "# ridge: k e_p(eps = 1e-k)\n";
    for (const auto& [k, e] : sweep.ridge) text << k << ' ' << format_double(e) << '\n';
    text << "\n# recursive smoothed delta: gamma e_p\n";
    for (const auto& [g, e] : sweep.recursive) {
      text << format_double(g) << ' ' << format_double(e) << '\n';
    }
    text << "\n# recursive exact delta: 0 e_p\n0 " << format_double(sweep.recursive_exact) << '\n';

    if (ov.out) {
      write_file(*ov.out, text.str());
    } else {
      out << text.str();
    }
    if (ov.summary) {
      nlohmann::json j;
      for (const auto& [k, e] : sweep.ridge) j["ridge"].push_back({{"k", k}, {"e_p", e}});
      for (const auto& [g, e] : sweep.recursive) {
        j["recursive"].push_back({{"gamma", g}, {"e_p", e}});
      }
      j["recursive_exact"] = sweep.recursive_exact;
      write_file(*ov.summary, j.dump(2) + "\n");
    }
    if (ov.svg) {
      Series ridge{"ridge", {}, {}};
      for (const auto& [k, e] : sweep.ridge) {
        ridge.x.push_back(k);
        ridge.y.push_back(e);
      }
      std::vector<Series> series{ridge};
      for (const auto& [g, e] : sweep.recursive) {
        series.push_back({"recursive gamma=" + format_double(g), {1.0, 15.0}, {e, e}});
      }
      write_file(*ov.svg,
                 svg_line_chart(series, "precision error", "k (eps = 1e-k)", "log10 e_p", true));
    }
    return static_cast<int>(kStalled);
  });
}

int cmd_example1(const Overrides& ov, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<std::vector<double>> starts{{-3.0, 1.0}, {2.0, -4.0}, {1.0, -4.0}};
    if (ov.x0) starts = {*ov.x0};

    nlohmann::json summary;
    int code = kStalled;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      RunConfig cfg;
      cfg.problem.builtin = "example1";
      cfg.x0 = starts[i];
      apply_overrides(cfg, ov);
      cfg.x0 = starts[i];
      const Outcome o = execute(cfg);
      const bool many = starts.size() > 1;
      write_outputs(o, many ? indexed_path(cfg.trajectory_path, i + 1) : cfg.trajectory_path, "",
                    many ? indexed_path(cfg.svg_path, i + 1) : cfg.svg_path, "example 1");

      const Vector x0 = Eigen::Map<const Vector>(starts[i].data(), 2);
      const Vector ref = attraction::reference_solution();
      nlohmann::json j = o.summary;
      j["distance_to_reference"] = (o.run.trajectory.final().x - ref).norm();
      summary["runs"].push_back(j);
      out << "x0 = " << format_vector(x0) << ": ";
      print_outcome(out, o);

      const int c = exit_code(o.run.trajectory.termination);
      if (c == kFieldError || (c == kExhausted && code == kStalled)) code = c;
    }
    summary["reference"] = {{"x", to_json(attraction::reference_solution())},
                            {"v", attraction::kReferenceValue}};
    if (ov.summary) write_file(*ov.summary, summary.dump(2) + "\n");
    return code;
  });
}

int cmd_example2(const Overrides& ov, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    using namespace essential;
    RunConfig cfg;
    cfg.problem.builtin = "example2";
    apply_overrides(cfg, ov);
    const Outcome o = execute(cfg);
    write_outputs(o, cfg.trajectory_path, "", cfg.svg_path, "example 2");

    const Example2Data d = example2_data();
    const Trajectory& t = o.run.trajectory;
    const EssentialState fin = unpack(t.final().x);
    double drift = 0.0;
    for (const Sample& s : t.samples) drift = std::max(drift, EssentialModel::manifold_drift(s.x));
    const auto cs = generate_correspondences(d.points, d.T_true, d.R_true);
    const Mat3 E = skew(fin.T) * fin.R;
    double epipolar = 0.0;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      epipolar = std::max(epipolar, std::abs(cs.m1[k].dot(E * cs.m2[k])));
    }

    nlohmann::json j = o.summary;
    j["rotation_error"] = rotation_error_up_to_ambiguity(fin, d.R_true);
    j["rotation_error_direct"] = rotation_error(fin.R, d.R_true);
    j["manifold_drift"] = drift;
    j["epipolar_residual"] = epipolar;
    j["reference_rotation_adjustment"] = spectral_norm(d.R_true - d.R_printed);
    if (!cfg.summary_path.empty()) write_file(cfg.summary_path, j.dump(2) + "\n");

    print_outcome(out, o);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "  rotation error %.4g (up to sign/twist), drift %.3g, epipolar residual %.3g\n",
                  j["rotation_error"].get<double>(), drift, epipolar);
    out << buf;
    return exit_code(t.termination);
  });
}

}  // namespace pgflow::cli
