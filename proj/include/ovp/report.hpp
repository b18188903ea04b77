#ifndef OVP_REPORT_HPP_
#define OVP_REPORT_HPP_

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace ovp {

// Malformed input files (CSV/PGM); the message carries file:line.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Signal CSV: one floating value per line, '#' starts a comment, period
// decimal separator. Values round-trip exactly (printed with max precision).
Eigen::VectorXd read_csv_signal(const std::string& path);
void write_csv_signal(const std::string& path, const Eigen::VectorXd& v);

// Fixed-size (800x600) polyline plot with axes and a legend; no plotting
// dependency, just a hand-written SVG document.
struct PlotSeries {
  std::string name;
  std::vector<double> y;
};
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<double>& x,
                    const std::vector<PlotSeries>& series, bool log_y = false);

// Shortest round-trip decimal formatting used by every text output.
std::string format_double(double v);

}  // namespace ovp

#endif
