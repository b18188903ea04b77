#include "ovp/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ovp {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Eigen::VectorXd read_csv_signal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(b, e - b + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument("trailing junk");
      values.push_back(v);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected one numeric value, got '" + tok + "'");
    }
  }
  if (values.empty()) throw ParseError(path + ": no values");
  return Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
}

void write_csv_signal(const std::string& path, const Eigen::VectorXd& v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (int i = 0; i < v.size(); ++i) out << format_double(v[i]) << "\n";
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<double>& x,
                    const std::vector<PlotSeries>& series, bool log_y) {
  if (x.empty() || series.empty())
    throw std::invalid_argument("write_svg_plot: empty data");
  const double width = 800, height = 600;
  const double ml = 80, mr = 30, mt = 50, mb = 60;

  auto ymap = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
  double xmin = x.front(), xmax = x.front();
  for (double v : x) {
    xmin = std::min(xmin, v);
    xmax = std::max(xmax, v);
  }
  double ymin = 0, ymax = 0;
  bool first = true;
  for (const auto& s : series)
    for (double v : s.y) {
      const double m = ymap(v);
      if (first) {
        ymin = ymax = m;
        first = false;
      }
      ymin = std::min(ymin, m);
      ymax = std::max(ymax, m);
    }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  auto px = [&](double v) {
    return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr);
  };
  auto py = [&](double v) {
    return height - mb - (ymap(v) - ymin) / (ymax - ymin) * (height - mt - mb);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\">\n"
      << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n"
      << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">"
      << svg_escape(title) << "</text>\n";
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
      << width - mr << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n<line x1=\"" << ml << "\" y1=\"" << mt
      << "\" x2=\"" << ml << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"400\" y=\"585\" text-anchor=\"middle\" font-size=\"13\">"
      << svg_escape(xlabel) << "</text>\n";
  svg << "<text x=\"18\" y=\"300\" text-anchor=\"middle\" font-size=\"13\" "
         "transform=\"rotate(-90 18 300)\">"
      << svg_escape(ylabel) << (log_y ? " (log10)" : "") << "</text>\n";
  // min/max tick labels
  svg << "<text x=\"" << ml << "\" y=\"" << height - mb + 18
      << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(xmin)
      << "</text>\n<text x=\"" << width - mr << "\" y=\"" << height - mb + 18
      << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(xmax)
      << "</text>\n";
  svg << "<text x=\"" << ml - 6 << "\" y=\"" << height - mb
      << "\" font-size=\"11\" text-anchor=\"end\">" << format_double(ymin)
      << "</text>\n<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
      << "\" font-size=\"11\" text-anchor=\"end\">" << format_double(ymax)
      << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % 8];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < series[s].y.size(); ++i)
      svg << px(x[i]) << "," << py(series[s].y[i]) << " ";
    svg << "\"/>\n";
    const double ly = mt + 16 + 18 * s;
    svg << "<line x1=\"" << width - mr - 150 << "\" y1=\"" << ly << "\" x2=\""
        << width - mr - 125 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n<text x=\"" << width - mr - 120
        << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
        << svg_escape(series[s].name) << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << svg.str();
}

}  // namespace ovp
