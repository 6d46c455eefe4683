#pragma once

// Minimal SVG line plots for the experiment reports.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional symmetric error bars
};

class Plot {
 public:
  Plot(std::string xlabel, std::string ylabel) : xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void add(Series s) { series_.push_back(std::move(s)); }

  std::string svg() const {
    constexpr double W = 480, H = 360, L = 70, R = 20, T = 20, B = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series_)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double e = i < s.err.size() ? s.err[i] : 0.0;
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i] - e);
        y1 = std::max(y1, s.y[i] + e);
      }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
      os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
         << short_num(xv) << "</text>\n";
      os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
         << short_num(yv) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" font-size=\"13\" text-anchor=\"middle\">"
       << xlabel_ << "</text>\n";
    os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (T + H - B) / 2 << ")\">" << ylabel_ << "</text>\n";
    if (y0 < 0 && y1 > 0)
      os << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << py(0) << "\" y2=\"" << py(0)
         << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    for (std::size_t k = 0; k < series_.size(); ++k) {
      const auto& s = series_[k];
      const char* c = colors[k % 7];
      os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      os << "\"/>\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
        if (i < s.err.size())
          os << "<line x1=\"" << px(s.x[i]) << "\" x2=\"" << px(s.x[i]) << "\" y1=\"" << py(s.y[i] - s.err[i])
             << "\" y2=\"" << py(s.y[i] + s.err[i]) << "\" stroke=\"" << c << "\"/>\n";
      }
      os << "<text x=\"" << L + 8 << "\" y=\"" << T + 16 + 14 * k << "\" font-size=\"11\" fill=\"" << c << "\">"
         << s.label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
  }

 private:
  static std::string short_num(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
  }

  std::string xlabel_;
  std::string ylabel_;
  std::vector<Series> series_;
};
