#include "krbn_tools/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>


namespace krbn::tools {

namespace {

constexpr double kW = 640, kH = 420, kL = 70, kR = 170, kT = 40, kB = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

}  // namespace

void write_svg_plot(const std::filesystem::path& file, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (ok(s.x[i], s.y[i])) {
        x0 = std::min(x0, tx(s.x[i]));
        x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i]));
        y1 = std::max(y1, ty(s.y[i]));
      }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  auto px = [&](double x) { return kL + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kT + ph - (ty(y) - y0) / (y1 - y0) * ph; };

  std::ofstream out(file);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kL + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(spec.title)
      << "</text>\n";
  out << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    const double gx = kL + pw * i / 4.0, gy = kT + ph - ph * i / 4.0;
    out << "<text x=\"" << gx << "\" y=\"" << kT + ph + 16 << "\" text-anchor=\"middle\">"
        << num(spec.log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
    out << "<text x=\"" << kL - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">"
        << num(spec.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
    out << "<line x1=\"" << kL << "\" y1=\"" << gy << "\" x2=\"" << kL + pw << "\" y2=\"" << gy
        << "\" stroke=\"#ddd\"/>\n";
  }
  out << "<text x=\"" << kL + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << esc(spec.xlabel)
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << kT + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kT + ph / 2 << ")\">" << esc(spec.ylabel) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % 8];
    if (s.markers) {
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
        if (ok(s.x[i], s.y[i]))
          out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << color
              << "\"/>\n";
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
        if (ok(s.x[i], s.y[i])) out << px(s.x[i]) << "," << py(s.y[i]) << " ";
      out << "\"/>\n";
    }
    const double ly = kT + 14 + 18 * static_cast<double>(k);
    out << "<rect x=\"" << kW - kR + 12 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"12\" fill=\"" << color
        << "\"/>\n";
    out << "<text x=\"" << kW - kR + 30 << "\" y=\"" << ly + 1 << "\">" << esc(s.label) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace krbn::tools
