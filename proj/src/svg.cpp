#include "wonham/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "wonham/errors.hpp"

namespace wonham {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
// Lines are clipped this many decades below the largest value.
constexpr double kMaxDecades = 10.0;

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
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

std::string render_log_plot(const std::vector<SvgSeries>& series, const std::string& title,
                            const std::string& x_label, const std::string& y_label) {
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_max = -std::numeric_limits<double>::infinity(), y_min = -y_max;
  for (const SvgSeries& s : series) {
    if (s.x.size() != s.y.size()) fail(ErrorCode::DimensionMismatch, "series '" + s.label + "': x and y differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      if (s.y[i] > 0.0) {
        y_max = std::max(y_max, std::log10(s.y[i]));
        y_min = std::min(y_min, std::log10(s.y[i]));
      }
    }
  }
  if (!std::isfinite(x_min) || x_max <= x_min) {
    x_min = 0.0;
    x_max = 1.0;
  }
  if (!std::isfinite(y_max)) {
    y_min = -1.0;
    y_max = 0.0;
  }
  double decade_hi = std::ceil(y_max);
  double decade_lo = std::floor(std::max(y_min, y_max - kMaxDecades));
  if (decade_hi <= decade_lo) decade_hi = decade_lo + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double ly) { return kTop + (decade_hi - ly) / (decade_hi - decade_lo) * plot_h; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
    << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";

  // Decade grid and labels.
  for (double d = decade_lo; d <= decade_hi + 0.5; d += 1.0) {
    const double y = py(d);
    s << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + plot_w) << "\" y2=\""
      << num(y) << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e" << static_cast<int>(d)
      << "</text>\n";
  }
  const int x_ticks = 5;
  for (int k = 0; k <= x_ticks; ++k) {
    const double xv = x_min + (x_max - x_min) * k / x_ticks;
    char lbl[32];
    std::snprintf(lbl, sizeof lbl, "%g", xv);
    s << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + plot_h + 18) << "\" text-anchor=\"middle\">" << lbl
      << "</text>\n";
  }
  s << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w) << "\" height=\""
    << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
    << escape(x_label) << "</text>\n";
  s << "<text transform=\"translate(18," << num(kTop + plot_h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(y_label) << "</text>\n";

  struct RateLabel {
    double x, y;
    std::string text;
    const char* color;
  };
  std::vector<RateLabel> labels;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const SvgSeries& ser = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
    std::vector<std::string> segments;
    std::string current;
    double last_x = 0.0, last_y = 0.0;
    bool have_last = false;
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      const bool ok = ser.y[i] > 0.0 && std::log10(ser.y[i]) >= decade_lo;
      if (!ok) {
        if (!current.empty()) segments.push_back(current);
        current.clear();
        continue;
      }
      last_x = px(ser.x[i]);
      last_y = py(std::log10(ser.y[i]));
      have_last = true;
      if (!current.empty()) current += ' ';
      current += num(last_x) + "," + num(last_y);
    }
    if (!current.empty()) segments.push_back(current);
    for (const std::string& pts : segments) {
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    }
    if (have_last) {
      char rate[32];
      std::snprintf(rate, sizeof rate, "%.3f", ser.rate);
      labels.push_back({last_x + 4, last_y + 4, rate, color});
    }
    // Legend.
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    const double lx = kLeft + plot_w + 40;
    s << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 18) << "\" y2=\"" << num(ly - 4)
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << num(lx + 22) << "\" y=\"" << num(ly) << "\">" << escape(ser.label) << "</text>\n";
  }
  // Push rate labels apart vertically so lines ending close together stay legible.
  std::stable_sort(labels.begin(), labels.end(), [](const RateLabel& a, const RateLabel& b) { return a.y < b.y; });
  for (std::size_t i = 1; i < labels.size(); ++i) labels[i].y = std::max(labels[i].y, labels[i - 1].y + 13.0);
  for (const RateLabel& l : labels) {
    s << "<text x=\"" << num(l.x) << "\" y=\"" << num(l.y) << "\" fill=\"" << l.color << "\">" << l.text << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace wonham
