#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "otqq/io.hpp"

namespace otqq {

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s == "-0.00" || s == "-0.000") s.erase(0, 1);
  return s;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

}  // namespace

SvgFrame SvgFrame::fit(const PlotSet& set, const SvgOptions& options) {
  SvgFrame f;
  f.width = options.width;
  f.height = options.height;
  f.margin = options.margin;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : set.pairs) {
    lo = std::min({lo, p.x, p.y});
    hi = std::max({hi, p.x, p.y});
  }
  if (!(lo <= hi)) {
    lo = -1.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  f.lo = lo - pad;
  f.hi = hi + pad;
  return f;
}

double SvgFrame::px(double x) const { return margin + (x - lo) / (hi - lo) * (width - 2 * margin); }

double SvgFrame::py(double y) const { return height - margin - (y - lo) / (hi - lo) * (height - 2 * margin); }

std::string render_svg(const PlotSet& set, const SvgOptions& options) {
  const SvgFrame f = SvgFrame::fit(set, options);
  const std::string w = std::to_string(options.width);
  const std::string h = std::to_string(options.height);
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + w + "\" height=\"" + h +
       "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h + "\" fill=\"white\"/>\n";

  const double x0 = f.px(f.lo), x1 = f.px(f.hi), y0 = f.py(f.lo), y1 = f.py(f.hi);
  s += "<rect x=\"" + fixed(x0) + "\" y=\"" + fixed(y1) + "\" width=\"" + fixed(x1 - x0) + "\" height=\"" +
       fixed(y0 - y1) + "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";

  // Ticks at the frame ends and the middle.
  s += "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#222\">\n";
  for (int t = 0; t <= 2; ++t) {
    const double v = f.lo + 0.5 * t * (f.hi - f.lo);
    s += "<text x=\"" + fixed(f.px(v)) + "\" y=\"" + fixed(y0 + 14) + "\" text-anchor=\"middle\">" + tick_label(v) +
         "</text>\n";
    s += "<text x=\"" + fixed(x0 - 4) + "\" y=\"" + fixed(f.py(v) + 3) + "\" text-anchor=\"end\">" + tick_label(v) +
         "</text>\n";
  }
  s += "</g>\n";

  const std::string what = set.component ? "component " + std::to_string(*set.component + 1) : "potential";
  const std::string title = options.title.empty() ? set.method.label() + " " + what : options.title;
  s += "<text x=\"" + fixed(options.width / 2.0) + "\" y=\"" + fixed(options.margin / 2.0) +
       "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" + escape(title) + "</text>\n";
  s += "<text x=\"" + fixed(options.width / 2.0) + "\" y=\"" + fixed(options.height - 12.0) +
       "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">X sample, " + escape(what) +
       "</text>\n";
  s += "<text x=\"14\" y=\"" + fixed(options.height / 2.0) +
       "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       fixed(options.height / 2.0) + ")\">Y sample, " + escape(what) + "</text>\n";

  s += "<line class=\"diagonal\" x1=\"" + fixed(x0) + "\" y1=\"" + fixed(y0) + "\" x2=\"" + fixed(x1) + "\" y2=\"" +
       fixed(y1) + "\" stroke=\"#1f4fbf\" stroke-width=\"1.2\"/>\n";

  if (options.extra_slope) {
    // Clip y = a x + b to the frame.
    const double a = *options.extra_slope, b = options.extra_intercept;
    double xa = f.lo, xb = f.hi;
    if (a != 0.0) {
      const double t0 = (f.lo - b) / a, t1 = (f.hi - b) / a;
      xa = std::max(xa, std::min(t0, t1));
      xb = std::min(xb, std::max(t0, t1));
    }
    if (xa <= xb) {
      s += "<line class=\"reference\" data-slope=\"" + tick_label(a) + "\" x1=\"" + fixed(f.px(xa)) + "\" y1=\"" +
           fixed(f.py(a * xa + b)) + "\" x2=\"" + fixed(f.px(xb)) + "\" y2=\"" + fixed(f.py(a * xb + b)) +
           "\" stroke=\"#111\" stroke-width=\"1.2\" stroke-dasharray=\"5 3\"/>\n";
    }
  }

  s += "<g fill=\"#d2452b\" fill-opacity=\"0.6\">\n";
  const std::string r = fixed(options.marker_radius, 1);
  for (const auto& p : set.pairs)
    s += "<circle cx=\"" + fixed(f.px(p.x)) + "\" cy=\"" + fixed(f.py(p.y)) + "\" r=\"" + r + "\"/>\n";
  s += "</g>\n</svg>\n";
  return s;
}

}  // namespace otqq
