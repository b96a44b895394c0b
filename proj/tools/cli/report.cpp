#include "cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pgflow::cli {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Index n = traj.samples.empty() ? 0 : traj.samples.front().x.size();
  out << 't';
  for (Index i = 1; i <= n; ++i) out << ",x" << i;
  out << ",v,c_norm,stationarity_gap\n";
  for (const Sample& s : traj.samples) {
    out << format_double(s.t);
    for (Index i = 0; i < n; ++i) out << ',' << format_double(s.x(i));
    out << ',' << format_double(s.metrics.v) << ',' << format_double(s.metrics.c_norm) << ','
        << format_double(s.metrics.stationarity_gap) << '\n';
  }
}

nlohmann::json to_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

nlohmann::json to_json(const OptimalityReport& r) {
  nlohmann::json j;
  j["kkt_residual"] = r.kkt_residual;
  j["multipliers"] = to_json(r.multipliers);
  j["constraint_violation"] = r.constraint_violation;
  j["regular"] = r.regular;
  j["second_order_pass"] =
      r.second_order_pass ? nlohmann::json(*r.second_order_pass) : nlohmann::json(nullptr);
  j["min_projected_curvature"] = std::isfinite(r.min_projected_curvature)
                                     ? nlohmann::json(r.min_projected_curvature)
                                     : nlohmann::json(nullptr);
  j["null_basis_dim"] = r.null_basis_dim;
  return j;
}

nlohmann::json trajectory_summary(const Trajectory& traj) {
  nlohmann::json j;
  j["termination"] = to_string(traj.termination);
  j["accepted_steps"] = traj.accepted_steps;
  j["rejected_steps"] = traj.rejected_steps;
  const Sample& last = traj.final();
  j["final"] = {{"t", last.t},
                {"x", to_json(last.x)},
                {"v", last.metrics.v},
                {"c_norm", last.metrics.c_norm},
                {"stationarity_gap", last.metrics.stationarity_gap}};
  if (traj.failure) {
    j["failure"] = {{"t", traj.failure->t},
                    {"x", to_json(traj.failure->x)},
                    {"message", traj.failure->message}};
  }
  return j;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_line_chart(const std::vector<Series>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label, bool log_y) {
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 50;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                 "#8c564b"};

  auto yval = [log_y](double y) {
    return log_y ? std::log10(std::max(y, std::numeric_limits<double>::min())) : y;
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(yval(s.y[i]))) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, yval(s.y[i]));
      y1 = std::max(y1, yval(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (yval(y) - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(title) << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double sx = L + (W - L - R) * i / 4.0;
    const double sy = H - B - (H - T - B) * i / 4.0;
    o << "<text x=\"" << sx << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
      << format_double(std::round(fx * 1000) / 1000) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
      << (log_y ? "1e" : "") << format_double(std::round(fy * 100) / 100) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << escape_xml(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << escape_xml(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % (sizeof colors / sizeof *colors)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(yval(s.y[i]))) continue;
      o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    o << "\"/>\n";
    const double ly = T + 16 * static_cast<double>(k + 1);
    o << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30
      << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - R + 34 << "\" y=\"" << ly << "\">" << escape_xml(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace pgflow::cli
