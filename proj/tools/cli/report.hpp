#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgflow/diagnostics.hpp"
#include "pgflow/integrate.hpp"

namespace pgflow::cli {

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double v);

/// Header `t,x1..xn,v,c_norm,stationarity_gap` and one row per sample.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const OptimalityReport& r);
/// Termination, final state, step counts and the failure record if any.
nlohmann::json trajectory_summary(const Trajectory& traj);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line chart; with log_y the y values are plotted as log10.
std::string svg_line_chart(const std::vector<Series>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label, bool log_y);

/// Write text to a file, throwing std::runtime_error on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace pgflow::cli
