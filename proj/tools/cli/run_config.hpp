#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgflow/dynamics.hpp"
#include "pgflow/error.hpp"
#include "pgflow/integrate.hpp"
#include "pgflow/problem.hpp"

namespace pgflow::cli {

/// Bad configuration; line and column are 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) +
                             ": " + what
                       : what),
        line_(line),
        column_(column) {}

  [[nodiscard]] int line() const noexcept { return line_; }
  [[nodiscard]] int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

struct ProblemSpec {
  /// "example1", "example2", "unbounded", or empty for an inline problem.
  std::string builtin;
  Index n = 0;
  std::string objective;
  std::vector<std::string> constraints;
};

struct GainSpec {
  std::string type;  // identity | scalar | adaptive | pinv
  std::optional<double> q;
  std::optional<double> k;
  std::optional<double> floor;
  std::optional<std::size_t> refresh_every;
};

/**
 * Parsed run configuration. Unset optionals fall back to the defaults of the
 * chosen builtin (or of the library for inline problems).
 */
struct RunConfig {
  ProblemSpec problem;
  std::optional<std::vector<double>> x0;
  std::optional<std::string> mode;       // feasible | modified
  std::optional<std::string> rho;        // number or "gain"
  std::optional<std::string> projector;  // naive | ridge | recursive
  std::optional<std::string> delta;      // smoothed | exact
  std::optional<double> gamma;
  std::optional<double> eps;
  std::optional<double> mu;
  std::optional<double> condition_cap;
  GainSpec gain;
  RKSettings integrator;
  std::string trajectory_path;
  std::string summary_path;
  std::string svg_path;
  std::uint64_t seed = 0;
};

/// Command-line overrides applied on top of a RunConfig.
struct Overrides {
  std::optional<std::string> out;
  std::optional<std::string> summary;
  std::optional<std::string> svg;
  std::optional<std::uint64_t> seed;
  std::optional<double> tmax;
  std::optional<double> rtol;
  std::optional<double> atol;
  std::optional<double> gamma;
  std::optional<std::string> rho;
  std::optional<double> mu;
  std::optional<double> eps;
  std::optional<std::string> projector;
  /// name or name=value (value is q, k or μ for scalar, adaptive, pinv).
  std::optional<std::string> gain;
  std::optional<std::vector<double>> x0;
};

/// Parse YAML text. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

void apply_overrides(RunConfig& cfg, const Overrides& o);

/// A problem, a start and a ready-to-integrate field.
struct ResolvedRun {
  Problem problem;
  FlowConfig flow;
  Vector x0;
  std::optional<FlowField> field;
};

/// Build the problem and field. Throws ConfigError (or expr::SyntaxError).
ResolvedRun resolve(const RunConfig& cfg);

}  // namespace pgflow::cli
