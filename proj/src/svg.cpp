#include "rcsense/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace rcsense {

namespace {

constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
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

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  [[nodiscard]] double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }
};

Axis make_axis(std::vector<double> vals, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : vals) {
    const double t = log ? std::log10(v) : v;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.log) {
    for (double e = std::ceil(a.lo); e <= a.hi; e += 1.0) out.push_back(std::pow(10.0, e));
    if (!out.empty()) return out;
  }
  const double span = (a.log ? std::pow(10.0, a.hi) - std::pow(10.0, a.lo) : a.hi - a.lo);
  const double lo = a.log ? std::pow(10.0, a.lo) : a.lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  for (double t = std::ceil(lo / step) * step; t <= lo + span + 1e-9 * step; t += step) {
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return out;
}

}  // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  const double w = spec.width;
  const double h = spec.height;
  const double left = 80;
  const double right = 150;
  const double top = 40;
  const double bottom = 60;
  const double pw = w - left - right;
  const double ph = h - top - bottom;

  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<PlotSeries> kept;
  for (const auto& s : series) {
    PlotSeries k{s.label, {}, {}, s.lines, s.markers};
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      const double x = s.x[i];
      const double y = s.y[i];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if ((spec.log_x && x <= 0.0) || (spec.log_y && y <= 0.0)) continue;
      k.x.push_back(x);
      k.y.push_back(y);
      xs.push_back(x);
      ys.push_back(y);
    }
    kept.push_back(std::move(k));
  }
  const Axis ax = make_axis(xs, spec.log_x);
  const Axis ay = make_axis(ys, spec.log_y);
  auto px = [&](double x) { return left + ax.map(x) * pw; };
  auto py = [&](double y) { return top + (1.0 - ay.map(y)) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", w) +
       "\" height=\"" + fmt("%.0f", h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(spec.title) + "</text>\n";
  o += "<rect x=\"" + fmt("%.1f", left) + "\" y=\"" + fmt("%.1f", top) + "\" width=\"" +
       fmt("%.1f", pw) + "\" height=\"" + fmt("%.1f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ticks(ax)) {
    const double x = px(t);
    if (x < left - 0.5 || x > left + pw + 0.5) continue;
    o += "<line x1=\"" + fmt("%.1f", x) + "\" y1=\"" + fmt("%.1f", top + ph) + "\" x2=\"" +
         fmt("%.1f", x) + "\" y2=\"" + fmt("%.1f", top + ph + 5) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt("%.1f", x) + "\" y=\"" + fmt("%.1f", top + ph + 18) +
         "\" text-anchor=\"middle\">" + fmt("%g", t) + "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = py(t);
    if (y < top - 0.5 || y > top + ph + 0.5) continue;
    o += "<line x1=\"" + fmt("%.1f", left - 5) + "\" y1=\"" + fmt("%.1f", y) + "\" x2=\"" +
         fmt("%.1f", left) + "\" y2=\"" + fmt("%.1f", y) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt("%.1f", left - 8) + "\" y=\"" + fmt("%.1f", y + 4) +
         "\" text-anchor=\"end\">" + fmt("%g", t) + "</text>\n";
  }
  o += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"" + fmt("%.1f", h - 15) +
       "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
  o += "<text transform=\"translate(18," + fmt("%.1f", top + ph / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(spec.y_label) + "</text>\n";

  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto& s = kept[k];
    const char* color = kColors[k % kColors.size()];
    if (s.lines && s.x.size() > 1) {
      o += "<polyline fill=\"none\" stroke=\"";
      o += color;
      o += "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i > 0) o += ' ';
        o += fmt("%.2f", px(s.x[i])) + "," + fmt("%.2f", py(s.y[i]));
      }
      o += "\"/>\n";
    }
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        o += "<circle cx=\"" + fmt("%.2f", px(s.x[i])) + "\" cy=\"" + fmt("%.2f", py(s.y[i])) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
      }
    }
    const double ly = top + 14 + 18 * static_cast<double>(k);
    o += "<line x1=\"" + fmt("%.1f", left + pw + 12) + "\" y1=\"" + fmt("%.1f", ly - 4) +
         "\" x2=\"" + fmt("%.1f", left + pw + 32) + "\" y2=\"" + fmt("%.1f", ly - 4) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + fmt("%.1f", left + pw + 36) + "\" y=\"" + fmt("%.1f", ly) + "\">" +
         escape(s.label) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace rcsense
