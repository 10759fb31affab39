#include "airpid/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "airpid/csv.hpp"

namespace airpid::svg {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 150.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void grow(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
};

}  // namespace

std::string render_chart(const std::string& title, const std::string& x_label,
                         const std::string& y_label,
                         const std::vector<Series>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        xr.grow(s.x[i]);
        yr.grow(s.y[i]);
      }
    }
  }
  if (!xr.valid() || !yr.valid()) {
    return "";  // nothing plottable
  }
  if (xr.hi == xr.lo) xr.hi = xr.lo + 1.0;
  if (yr.hi == yr.lo) yr.hi = yr.lo + 1.0;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto px = [&](double x) {
    return kMarginLeft + plot_w * (x - xr.lo) / (xr.hi - xr.lo);
  };
  const auto py = [&](double y) {
    return kMarginTop + plot_h * (1.0 - (y - yr.lo) / (yr.hi - yr.lo));
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
     << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << title << "</text>\n";

  // Axes and ticks.
  os << "<g stroke=\"black\" fill=\"none\">\n";
  os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h
     << "\" x2=\"" << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h
     << "\"/>\n";
  os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\""
     << kMarginLeft << "\" y2=\"" << kMarginTop + plot_h << "\"/>\n";
  os << "</g>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    os << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << kMarginTop + plot_h + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << fmt(xv) << "</text>\n";
    os << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(py(yv) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << fmt(yv) << "</text>\n";
    os << "<line x1=\"" << fmt(px(xv)) << "\" y1=\"" << kMarginTop + plot_h
       << "\" x2=\"" << fmt(px(xv)) << "\" y2=\"" << kMarginTop + plot_h + 4
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << fmt(py(yv))
       << "\" x2=\"" << kMarginLeft << "\" y2=\"" << fmt(py(yv))
       << "\" stroke=\"black\"/>\n";
  }
  os << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\">"
     << x_label << "</text>\n";
  os << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\" transform=\"rotate(-90 18 "
     << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

  // Series polylines; non-finite samples break the line.
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(*kPalette))];
    std::string points;
    const auto flush = [&]() {
      if (!points.empty()) {
        os << "<polyline fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
        points.clear();
      }
    };
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      const double xv = series[s].x[i];
      const double yv = series[s].y[i];
      if (!std::isfinite(xv) || !std::isfinite(yv)) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += fmt(px(xv)) + ',' + fmt(py(yv));
    }
    flush();
    // Legend entry.
    const double ly = kMarginTop + 16.0 * (s + 1);
    os << "<line x1=\"" << kMarginLeft + plot_w + 12 << "\" y1=\"" << ly
       << "\" x2=\"" << kMarginLeft + plot_w + 36 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kMarginLeft + plot_w + 42 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[s].label
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

bool column_index(const io::CsvFile& csv, const std::string& name, int* out,
                  std::string* error) {
  for (std::size_t i = 0; i < csv.columns.size(); ++i) {
    if (csv.columns[i] == name) {
      *out = static_cast<int>(i);
      return true;
    }
  }
  if (error) *error = "missing column '" + name + "'";
  return false;
}

bool extract(const io::CsvFile& csv, const std::string& xcol,
             const std::vector<std::string>& ycols,
             std::vector<Series>& series, std::string* error) {
  int xi = 0;
  if (!column_index(csv, xcol, &xi, error)) return false;
  std::vector<int> yi(ycols.size());
  for (std::size_t c = 0; c < ycols.size(); ++c) {
    if (!column_index(csv, ycols[c], &yi[c], error)) return false;
  }
  series.clear();
  for (const auto& name : ycols) series.push_back(Series{name, {}, {}});
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    try {
      const double xv = io::parse_double(csv.rows[r][xi]);
      for (std::size_t c = 0; c < ycols.size(); ++c) {
        series[c].x.push_back(xv);
        series[c].y.push_back(io::parse_double(csv.rows[r][yi[c]]));
      }
    } catch (const std::exception&) {
      if (error) *error = "bad numeric value at data row " +
                          std::to_string(r + 1);
      return false;
    }
  }
  return true;
}

}  // namespace

bool plot_csv(const std::string& csv_path, const std::string& kind,
              const std::string& svg_path, std::string* error) {
  io::CsvFile csv;
  std::vector<Series> series;
  std::string title, xlabel, ylabel;

  if (kind == "training") {
    if (!io::read_csv(csv_path, "airpid.training.v1", csv, error)) {
      return false;
    }
    if (!extract(csv, "timestep",
                 {"mean_leg_effective_speed", "settling_time_s",
                  "overshoot_m"},
                 series, error)) {
      return false;
    }
    title = "Training progress";
    xlabel = "timestep";
    ylabel = "effective speed (m/s) / settling (s) / overshoot (m)";
  } else if (kind == "trajectory") {
    if (!io::read_csv(csv_path, "airpid.trajectory.v1", csv, error)) {
      return false;
    }
    if (!extract(csv, "t", {"x", "y", "z", "pe"}, series, error)) {
      return false;
    }
    title = "Trajectory";
    xlabel = "time (s)";
    ylabel = "position (m) / position error (m)";
  } else if (kind == "gains") {
    if (!io::read_csv(csv_path, "airpid.trajectory.v1", csv, error)) {
      return false;
    }
    if (!extract(csv, "t", {"kp", "ki", "kd"}, series, error)) {
      return false;
    }
    title = "PID gains vs time";
    xlabel = "time (s)";
    ylabel = "gain";
  } else {
    if (error) *error = "unknown plot kind '" + kind + "'";
    return false;
  }

  const std::string body = render_chart(title, xlabel, ylabel, series);
  if (body.empty()) {
    if (error) *error = csv_path + ": no plottable data rows";
    return false;
  }
  std::ofstream f(svg_path, std::ios::trunc);
  if (!f) {
    if (error) *error = "cannot write " + svg_path;
    return false;
  }
  f << body;
  return f.good();
}

}  // namespace airpid::svg
