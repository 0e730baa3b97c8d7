#include "nnklab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace nnklab {

namespace {

constexpr int kWidth = 760;
constexpr int kHeight = 460;
constexpr int kLeft = 64, kRight = 180, kTop = 40, kBottom = 48;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<ChartSeries>& series) {
  if (series.empty()) throw std::invalid_argument("write_line_chart_svg: no series");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || (!s.band.empty() && s.band.size() != s.y.size()))
      throw std::invalid_argument("write_line_chart_svg: ragged series '" + s.label + "'");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double b = s.band.empty() ? 0.0 : s.band[i];
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i] - b);
      ymax = std::max(ymax, s.y[i] + b);
    }
  }
  if (!(xmin <= xmax) || !(ymin <= ymax))
    throw std::invalid_argument("write_line_chart_svg: empty series data");
  if (xmax == xmin) xmax = xmin + 1.0;
  const double ypad = std::max(0.01, (ymax - ymin) * 0.08);
  ymin -= ypad;
  ymax += ypad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto tx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto ty = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_line_chart_svg: cannot open '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

  // grid and ticks
  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double fy = ymin + (ymax - ymin) * t / ticks;
    const double gy = ty(fy);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << num(gy) << "\" x2=\"" << kLeft + pw
        << "\" y2=\"" << num(gy) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(gy + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy)
        << "</text>\n";
    const double fx = xmin + (xmax - xmin) * t / ticks;
    const double gx = tx(fx);
    out << "<line x1=\"" << num(gx) << "\" y1=\"" << kTop << "\" x2=\"" << num(gx) << "\" y2=\""
        << kTop + ph << "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(gx) << "\" y=\"" << kTop + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(fx)
        << "</text>\n";
  }
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(pw) << "\" height=\""
      << num(ph) << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << kTop + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 18 " << kTop + ph / 2 << ")\">" << y_label << "</text>\n";

  // bands first so lines stay visible
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    if (sr.band.empty() || sr.x.empty()) continue;
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    out << "<path d=\"M";
    for (std::size_t i = 0; i < sr.x.size(); ++i)
      out << ' ' << num(tx(sr.x[i])) << ' ' << num(ty(sr.y[i] + sr.band[i])) << " L";
    for (std::size_t i = sr.x.size(); i-- > 0;)
      out << ' ' << num(tx(sr.x[i])) << ' ' << num(ty(sr.y[i] - sr.band[i]))
          << (i == 0 ? " Z" : " L");
    out << "\" fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    if (sr.x.empty()) continue;
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
    if (sr.dashed) out << " stroke-dasharray=\"6 4\"";
    out << " points=\"";
    for (std::size_t i = 0; i < sr.x.size(); ++i)
      out << num(tx(sr.x[i])) << ',' << num(ty(sr.y[i])) << ' ';
    out << "\"/>\n";
    for (std::size_t i = 0; i < sr.x.size(); ++i)
      out << "<circle cx=\"" << num(tx(sr.x[i])) << "\" cy=\"" << num(ty(sr.y[i]))
          << "\" r=\"2.4\" fill=\"" << color << "\"/>\n";
  }

  // legend
  const double lx = kLeft + pw + 14;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    const double lyy = kTop + 10 + double(s) * 18;
    out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(lyy) << "\" x2=\"" << num(lx + 26)
        << "\" y2=\"" << num(lyy) << "\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
    if (sr.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
    out << "<text x=\"" << num(lx + 32) << "\" y=\"" << num(lyy + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << sr.label << "</text>\n";
  }
  out << "</svg>\n";
  if (!out.good()) throw std::runtime_error("write_line_chart_svg: write failed on '" + path + "'");
}

}  // namespace nnklab
