#include "fmkdv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fmkdv {

namespace {

constexpr double kW = 720, kH = 480;
constexpr double kLeft = 80, kRight = 160, kTop = 40, kBottom = 60;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double map(double v) const {
    const double a = log ? std::log10(v) : v;
    return (a - lo) / (hi - lo);
  }
};

Axis make_axis(const std::vector<double>& values, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0)) continue;
    const double w = log ? std::log10(v) : v;
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-300) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.03 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  std::vector<double> xs, ys;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("plot series " + s.label + ": x and y lengths differ");
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Axis ax = make_axis(xs, spec.log_x), ay = make_axis(ys, spec.log_y);
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double v) { return kLeft + pw * ax.map(v); };
  auto py = [&](double v) { return kTop + ph * (1.0 - ay.map(v)); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW
    << " " << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(spec.title) << "</text>\n";
  o << "<clipPath id=\"plot\"><rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\"/></clipPath>\n";

  for (const auto& b : spec.bands) {
    const double a = std::clamp(px(b.x0), kLeft, kLeft + pw), c = std::clamp(px(b.x1), kLeft, kLeft + pw);
    o << "<rect x=\"" << num(std::min(a, c)) << "\" y=\"" << kTop << "\" width=\"" << num(std::abs(c - a))
      << "\" height=\"" << ph << "\" fill=\"" << esc(b.color) << "\" fill-opacity=\"0.15\"><title>" << esc(b.label)
      << "</title></rect>\n";
  }

  // ticks
  for (int i = 0; i <= 5; ++i) {
    const double fx = i / 5.0;
    const double vx = ax.lo + fx * (ax.hi - ax.lo);
    const double vy = ay.lo + fx * (ay.hi - ay.lo);
    const double gx = kLeft + fx * pw, gy = kTop + ph * (1.0 - fx);
    o << "<line x1=\"" << num(gx) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(gx) << "\" y2=\"" << kTop + ph + 5
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(gx) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
      << num(ax.log ? std::pow(10.0, vx) : vx) << "</text>\n";
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(gy) << "\" x2=\"" << kLeft << "\" y2=\"" << num(gy)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(gy + 4) << "\" text-anchor=\"end\">"
      << num(ay.log ? std::pow(10.0, vy) : vy) << "</text>\n";
  }
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 15 << "\" text-anchor=\"middle\">" << esc(spec.xlabel)
    << "</text>\n";
  o << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << esc(spec.ylabel) << "</text>\n";

  std::size_t idx = 0;
  for (const auto& s : spec.series) {
    const char* color = kPalette[idx % 8];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if ((spec.log_x && s.x[i] <= 0) || (spec.log_y && s.y[i] <= 0)) continue;
      pts << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
      if (s.markers)
        o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color
          << "\" clip-path=\"url(#plot)\"/>\n";
    }
    o << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.3\" clip-path=\"url(#plot)\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(idx);
    o << "<line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw + 32 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kLeft + pw + 36 << "\" y=\"" << ly << "\">" << esc(s.label) << "</text>\n";
    ++idx;
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::filesystem::path& path, const PlotSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << render_svg(spec);
}

}  // namespace fmkdv
