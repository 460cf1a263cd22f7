#include "core/svg_chart.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace mars {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 610.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 340.0;

const char* kPalette[] = {"#3366cc", "#dc3912", "#ff9900", "#109618", "#990099", "#0099c6"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void open_svg(std::ostringstream& os, const std::string& title, const std::string& y_label) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << (kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n";
  os << "<text x=\"18\" y=\"" << ((kTop + kBottom) / 2)
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << ((kTop + kBottom) / 2) << ")\">"
     << escape(y_label) << "</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\""
     << kBottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
     << kBottom << "\" stroke=\"black\"/>\n";
}

// 0..max padded by 5%, 5 ticks. All charts here are non-negative.
void y_ticks(std::ostringstream& os, double max_value, double* scale_out) {
  double top = max_value <= 0.0 ? 1.0 : max_value * 1.05;
  for (int t = 0; t <= 4; ++t) {
    double frac = t / 4.0;
    double y = kBottom - frac * (kBottom - kTop);
    os << "<line x1=\"" << (kLeft - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft
       << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
    if (t > 0) {
      os << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kRight << "\" y2=\""
         << num(y) << "\" stroke=\"#dddddd\"/>\n";
    }
    os << "<text x=\"" << (kLeft - 8) << "\" y=\"" << num(y + 4)
       << "\" text-anchor=\"end\">" << tick_label(top * frac) << "</text>\n";
  }
  *scale_out = (kBottom - kTop) / top;
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& y_label,
                           const std::vector<std::string>& x_labels,
                           const std::vector<ChartSeries>& series) {
  std::ostringstream os;
  open_svg(os, title, y_label);
  double max_value = 0.0;
  for (const ChartSeries& s : series) {
    for (double v : s.values) max_value = std::max(max_value, v);
  }
  double scale = 1.0;
  y_ticks(os, max_value, &scale);

  const std::size_t n = x_labels.size();
  auto x_of = [&](std::size_t i) {
    if (n <= 1) return (kLeft + kRight) / 2;
    return kLeft + (kRight - kLeft) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  for (std::size_t i = 0; i < n; ++i) {
    os << "<text x=\"" << num(x_of(i)) << "\" y=\"" << (kBottom + 18)
       << "\" text-anchor=\"middle\">" << escape(x_labels[i]) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    std::ostringstream pts;
    for (std::size_t i = 0; i < series[s].values.size() && i < n; ++i) {
      double y = kBottom - series[s].values[i] * scale;
      pts << num(x_of(i)) << ',' << num(y) << ' ';
      os << "<circle cx=\"" << num(x_of(i)) << "\" cy=\"" << num(y) << "\" r=\"3\" fill=\""
         << color << "\"/>\n";
    }
    os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    double ly = kTop + 16.0 * static_cast<double>(s);
    os << "<rect x=\"" << (kRight - 120) << "\" y=\"" << num(ly - 9)
       << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << (kRight - 106) << "\" y=\"" << num(ly) << "\">"
       << escape(series[s].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string bar_chart_svg(const std::string& title, const std::string& y_label,
                          const std::vector<ChartBar>& bars) {
  std::ostringstream os;
  open_svg(os, title, y_label);
  double max_value = 0.0;
  for (const ChartBar& b : bars) max_value = std::max(max_value, b.value);
  double scale = 1.0;
  y_ticks(os, max_value, &scale);

  const std::size_t n = bars.size();
  const double span = (kRight - kLeft) / static_cast<double>(n == 0 ? 1 : n);
  for (std::size_t i = 0; i < n; ++i) {
    const char* color = kPalette[i % kPaletteSize];
    double cx = kLeft + span * (static_cast<double>(i) + 0.5);
    double w = span * 0.5;
    double h = bars[i].value * scale;
    os << "<rect x=\"" << num(cx - w / 2) << "\" y=\"" << num(kBottom - h) << "\" width=\""
       << num(w) << "\" height=\"" << num(h) << "\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << num(cx) << "\" y=\"" << num(kBottom - h - 6)
       << "\" text-anchor=\"middle\">" << tick_label(bars[i].value) << "</text>\n";
    os << "<text x=\"" << num(cx) << "\" y=\"" << (kBottom + 18) << "\" text-anchor=\"middle\">"
       << escape(bars[i].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mars
