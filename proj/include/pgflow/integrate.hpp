#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgflow/linalg.hpp"

namespace pgflow {

struct RKSettings {
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 1.0;
  double t_max = 100.0;
  double stall_speed = 1e-6;
  double stall_duration = 0.5;
  std::size_t max_steps = 1'000'000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
      throw std::invalid_argument("integrator tolerances must be positive");
    }
    if (!(h_min > 0.0) || !(h_min <= h_init) || !(h_init <= h_max)) {
      throw std::invalid_argument("integrator steps must satisfy 0 < h_min <= h_init <= h_max");
    }
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  }
};

enum class Termination { stalled, time_exhausted, step_limit, field_error };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::stalled: return "stalled";
    case Termination::time_exhausted: return "time_exhausted";
    case Termination::step_limit: return "step_limit";
    case Termination::field_error: return "field_error";
  }
  return "unknown";
}

struct SampleMetrics {
  double v = 0.0;
  double c_norm = 0.0;
  double stationarity_gap = 0.0;
};

struct Sample {
  double t = 0.0;
  Vector x;
  double speed = 0.0;  // ‖ẋ‖
  SampleMetrics metrics;
};

/// Error raised by the field, with where it happened.
struct FieldFailure {
  double t = 0.0;
  Vector x;
  std::string message;
};

struct Trajectory {
  std::vector<Sample> samples;
  Termination termination = Termination::time_exhausted;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::optional<FieldFailure> failure;

  [[nodiscard]] const Sample& final() const { return samples.back(); }
};

using Field = std::function<Vector(const Vector&)>;
/// Called after each accepted step with (t, x). May change the field.
using StepObserver = std::function<void(double, const Vector&)>;
/// Per-sample diagnostics recorded alongside the state.
using SampleProbe = std::function<SampleMetrics(const Vector&)>;

namespace detail {

// Dormand–Prince 5(4) tableau.
struct DormandPrince {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b − b̂ (fifth-order minus embedded fourth-order weights).
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/**
 * Adaptive Dormand–Prince 5(4) integration of ẋ = field(x) from x0.
 *
 * Steps are accepted when the RMS of the embedded error, scaled by
 * abs_tol + rel_tol·max(|xᵢ|, |x̂ᵢ|), is at most 1; step sizes follow a PI
 * controller. The run stops as `stalled` once the state has stayed within
 * stall_speed · stall_duration of an anchor point for stall_duration of
 * simulated time, i.e. its mean speed over the window is below stall_speed.
 * This holds whenever ‖ẋ‖ < stall_speed throughout the window, and also
 * ignores step-size chatter around a stiff equilibrium. Exceptions thrown by
 * the field end the run with `field_error` and are recorded in
 * Trajectory::failure.
 */
inline Trajectory integrate(const Field& field, const Vector& x0, const RKSettings& s,
                            const StepObserver& observer = {}, const SampleProbe& probe = {}) {
  s.validate();
  using DP = detail::DormandPrince;

  Trajectory traj;
  double t = 0.0;
  Vector x = x0;

  auto fail = [&](double at, const Vector& where, const std::exception& ex) {
    traj.termination = Termination::field_error;
    traj.failure = FieldFailure{at, where, ex.what()};
    return traj;
  };

  Vector k1;
  try {
    k1 = field(x);
    traj.samples.push_back({t, x, k1.norm(), probe ? probe(x) : SampleMetrics{}});
  } catch (const std::exception& ex) {
    traj.samples.push_back({t, x, 0.0, {}});
    return fail(t, x, ex);
  }

  double h = std::min(s.h_init, s.t_max);
  double prev_err = 1e-4;
  // Stall anchor: the run has stalled once every accepted state since
  // (anchor_t, anchor_x) lies within stall_speed · stall_duration of anchor_x
  // for stall_duration of simulated time.
  const double stall_radius = s.stall_speed * s.stall_duration;
  double anchor_t = 0.0;
  Vector anchor_x = x;

  constexpr double kBeta = 0.04;
  constexpr double kAlpha = 0.2 - 0.75 * kBeta;
  constexpr double kSafety = 0.9;

  const Index n = x.size();
  Vector k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), x5(n), err(n), stage(n);

  for (;;) {
    if (traj.accepted_steps + traj.rejected_steps >= s.max_steps) {
      traj.termination = Termination::step_limit;
      return traj;
    }
    const bool last = t + h >= s.t_max;
    if (last) h = s.t_max - t;

    Vector xnew;
    double err_norm = 0.0;
    try {
      stage = x + h * DP::a21 * k1;
      k2 = field(stage);
      stage = x + h * (DP::a31 * k1 + DP::a32 * k2);
      k3 = field(stage);
      stage = x + h * (DP::a41 * k1 + DP::a42 * k2 + DP::a43 * k3);
      k4 = field(stage);
      stage = x + h * (DP::a51 * k1 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4);
      k5 = field(stage);
      stage = x + h * (DP::a61 * k1 + DP::a62 * k2 + DP::a63 * k3 + DP::a64 * k4 + DP::a65 * k5);
      k6 = field(stage);
      x5 = x + h * (DP::b1 * k1 + DP::b3 * k3 + DP::b4 * k4 + DP::b5 * k5 + DP::b6 * k6);
      k7 = field(x5);
    } catch (const std::exception& ex) {
      return fail(t, x, ex);
    }
    err = h * (DP::e1 * k1 + DP::e3 * k3 + DP::e4 * k4 + DP::e5 * k5 + DP::e6 * k6 + DP::e7 * k7);
    for (Index i = 0; i < n; ++i) {
      const double scale = s.abs_tol + s.rel_tol * std::max(std::abs(x(i)), std::abs(x5(i)));
      err_norm += (err(i) / scale) * (err(i) / scale);
    }
    err_norm = n > 0 ? std::sqrt(err_norm / static_cast<double>(n)) : 0.0;

    const bool at_floor = h <= s.h_min;
    if (err_norm <= 1.0 || at_floor || !std::isfinite(err_norm)) {
      if (!std::isfinite(err_norm) && !at_floor) {
        ++traj.rejected_steps;
        h = std::max(0.2 * h, s.h_min);
        continue;
      }
      t = last ? s.t_max : t + h;
      x = x5;
      ++traj.accepted_steps;
      try {
        if (observer) {
          observer(t, x);
          k1 = field(x);
        } else {
          k1 = k7;
        }
        traj.samples.push_back({t, x, k1.norm(), probe ? probe(x) : SampleMetrics{}});
      } catch (const std::exception& ex) {
        return fail(t, x, ex);
      }

      if ((x - anchor_x).norm() > stall_radius) {
        anchor_t = t;
        anchor_x = x;
      } else if (t - anchor_t >= s.stall_duration) {
        traj.termination = Termination::stalled;
        return traj;
      }
      if (last) {
        traj.termination = Termination::time_exhausted;
        return traj;
      }

      const double e = std::max(err_norm, 1e-10);
      double factor = kSafety * std::pow(e, -kAlpha) * std::pow(prev_err, kBeta);
      factor = std::clamp(factor, 0.2, 10.0);
      prev_err = std::max(err_norm, 1e-4);
      h = std::clamp(h * factor, s.h_min, s.h_max);
    } else {
      ++traj.rejected_steps;
      const double factor = std::max(0.2, kSafety * std::pow(err_norm, -kAlpha));
      h = std::max(h * factor, s.h_min);
    }
  }
}

}  // namespace pgflow
