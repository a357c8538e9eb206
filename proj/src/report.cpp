#include "vpp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "vpp/data_io.hpp"
#include "vpp/error.hpp"

#ifndef VPP_VERSION
#define VPP_VERSION "0.0.0"
#endif

namespace vpp {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string bounds_svg(const std::vector<TraceSeries>& series, const PlotOptions& opts) {
  if (opts.width < 200 || opts.height < 150) {
    throw Error(ErrorCode::invalid_input, "plot must be at least 200x150");
  }
  // On a log axis non-positive bounds have no position and are skipped.
  auto usable = [&](double v) { return std::isfinite(v) && (!opts.log_scale || v > 0.0); };
  auto ymap = [&](double v) { return opts.log_scale ? std::log10(v) : v; };

  double x_max = 1.0;
  double y_lo = INFINITY;
  double y_hi = -INFINITY;
  for (const auto& s : series) {
    for (const auto& r : s.records) {
      x_max = std::max(x_max, static_cast<double>(r.iter));
      for (double v : {r.lb, r.ub}) {
        if (!usable(v)) continue;
        y_lo = std::min(y_lo, ymap(v));
        y_hi = std::max(y_hi, ymap(v));
      }
    }
  }
  if (!(y_lo <= y_hi)) {
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (y_hi - y_lo < 1e-12 * std::max(1.0, std::abs(y_hi))) {
    const double pad = std::max(1.0, std::abs(y_hi)) * 0.01;
    y_lo -= pad;
    y_hi += pad;
  }

  const double left = 90, right = 170, top = 40, bottom = 50;
  const double pw = opts.width - left - right;
  const double ph = opts.height - top - bottom;
  auto px = [&](double x) { return left + pw * x / x_max; };
  auto py = [&](double y) { return top + ph * (1.0 - (y - y_lo) / (y_hi - y_lo)); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << opts.width
    << "\" height=\"" << opts.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape_xml(opts.title) << "</text>\n";

  o << "<g stroke=\"#ccc\" stroke-width=\"1\">\n";
  const int y_ticks = 5;
  for (int i = 0; i <= y_ticks; ++i) {
    const double y = top + ph * i / y_ticks;
    o << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(left + pw)
      << "\" y2=\"" << fixed(y) << "\"/>\n";
  }
  o << "</g>\n";
  o << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw)
    << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= y_ticks; ++i) {
    const double yv = y_hi - (y_hi - y_lo) * i / y_ticks;
    const double label = opts.log_scale ? std::pow(10.0, yv) : yv;
    o << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(top + ph * i / y_ticks + 4)
      << "\" text-anchor=\"end\">" << tick_label(label) << "</text>\n";
  }
  const std::size_t x_ticks = std::min<std::size_t>(10, static_cast<std::size_t>(x_max));
  for (std::size_t i = 0; i <= x_ticks; ++i) {
    const double xv = std::round(x_max * static_cast<double>(i) / static_cast<double>(x_ticks));
    o << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << fixed(top + ph + 18)
      << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
  }
  o << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(opts.height - 10.0)
    << "\" text-anchor=\"middle\">iteration</text>\n";
  o << "<text x=\"16\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << fixed(top + ph / 2) << ")\">objective" << (opts.log_scale ? " (log)" : "") << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    for (int which = 0; which < 2; ++which) {
      std::string pts;
      for (const auto& r : series[s].records) {
        const double v = which == 0 ? r.ub : r.lb;
        if (!usable(v)) continue;
        if (!pts.empty()) pts += ' ';
        pts += fixed(px(static_cast<double>(r.iter))) + "," + fixed(py(ymap(v)));
      }
      if (pts.empty()) continue;
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
        << (which == 1 ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts << "\"/>\n";
    }
    const double ly = top + 14 + 36.0 * static_cast<double>(s);
    const double lx = left + pw + 12;
    o << "<line x1=\"" << fixed(lx) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(lx + 24)
      << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n"
      << "<text x=\"" << fixed(lx + 30) << "\" y=\"" << fixed(ly + 4) << "\">"
      << escape_xml(series[s].label) << " UB</text>\n"
      << "<line x1=\"" << fixed(lx) << "\" y1=\"" << fixed(ly + 16) << "\" x2=\"" << fixed(lx + 24)
      << "\" y2=\"" << fixed(ly + 16) << "\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n"
      << "<text x=\"" << fixed(lx + 30) << "\" y=\"" << fixed(ly + 20) << "\">"
      << escape_xml(series[s].label) << " LB</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<TraceSeries> load_series(const std::vector<std::filesystem::path>& traces) {
  std::vector<TraceSeries> out;
  for (const auto& p : traces) out.push_back({p.stem().string(), load_trace(p)});
  return out;
}

void set_relative_times(std::vector<ComparisonRow>& rows, double baseline_time) {
  for (auto& r : rows) {
    r.relative_time = baseline_time > 0.0 ? r.wall_time / baseline_time : -1.0;
  }
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream o;
  o << "method,k_final,iterations,final_gap,wall_time_s,relative_time,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    o << r.method << ',' << r.k_final << ',' << r.iterations << ',' << format_double(r.final_gap)
      << ',' << format_double(r.wall_time) << ','
      << (r.relative_time < 0.0 ? std::string() : format_double(r.relative_time)) << ','
      << status << '\n';
  }
  return o.str();
}

nlohmann::json to_json(const RunManifest& m) {
  return nlohmann::json{{"command", m.command},     {"config", m.config},
                        {"seed", m.seed},           {"artifacts", m.artifacts},
                        {"version", m.version},     {"started_at", m.started_at},
                        {"wall_time_s", m.wall_time}};
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* software_version() { return VPP_VERSION; }

}  // namespace vpp
