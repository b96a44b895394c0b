#pragma once

#include <chrono>
#include <utility>

#include "pgflow/diagnostics.hpp"
#include "pgflow/dynamics.hpp"
#include "pgflow/integrate.hpp"

namespace pgflow {

struct FlowRun {
  Trajectory trajectory;
  double wall_seconds = 0.0;
};

/// Per-sample diagnostics (v, ‖c‖, ‖fᵀ∇v‖) for a flow field.
inline SampleProbe flow_probe(const FlowField& field) {
  return [&field](const Vector& x) {
    const Problem& p = field.problem();
    SampleMetrics m;
    m.v = p.objective(x);
    m.c_norm = p.c(x).norm();
    const Matrix f = field.tangent(x, p.jac(x));
    m.stationarity_gap = (f.transpose() * p.objective_gradient(x)).norm();
    return m;
  };
}

/// Integrate a prepared field from x0, wiring the accepted-step hook.
inline FlowRun run_field(FlowField& field, const Vector& x0, const RKSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  FlowRun run;
  try {
    field.reset(x0);
  } catch (const std::exception& ex) {
    run.trajectory.samples.push_back({0.0, x0, 0.0, {}});
    run.trajectory.termination = Termination::field_error;
    run.trajectory.failure = FieldFailure{0.0, x0, ex.what()};
    return run;
  }
  run.trajectory = integrate(
      [&field](const Vector& x) { return field(x); }, x0, settings,
      [&field](double, const Vector& x) { field.on_accepted_step(x); }, flow_probe(field));
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

/// Solve min v s.t. c = 0 by integrating the configured flow from x0.
inline FlowRun run_flow(const Problem& problem, const FlowConfig& config, const Vector& x0,
                        const RKSettings& settings = {}) {
  FlowField field(problem, config);
  return run_field(field, x0, settings);
}

}  // namespace pgflow
