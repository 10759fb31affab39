#ifndef AIRPID_SVG_PLOT_HPP_
#define AIRPID_SVG_PLOT_HPP_

#include <string>
#include <vector>

namespace airpid::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // non-finite samples are skipped when drawing
};

// Self-contained SVG line chart with axes, tick labels and a legend.
// Output bytes are a pure function of the inputs.
std::string render_chart(const std::string& title,
                         const std::string& x_label,
                         const std::string& y_label,
                         const std::vector<Series>& series);

// kind is one of "training" (training.csv), "trajectory" or "gains"
// (both read trajectory.csv). Returns false with a diagnostic when the
// CSV is malformed or has no plottable rows.
bool plot_csv(const std::string& csv_path, const std::string& kind,
              const std::string& svg_path, std::string* error);

}  // namespace airpid::svg

#endif  // AIRPID_SVG_PLOT_HPP_
