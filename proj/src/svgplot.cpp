#include "notewatch/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "notewatch/common.hpp"

namespace notewatch::svgplot {

namespace {

constexpr int kMarginLeft = 60;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

constexpr const char* kPalette[] = {"#2563eb", "#dc2626", "#059669", "#7c3aed", "#ea580c"};
constexpr int kPaletteSize = 5;

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
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

struct Range {
  double lo = 0.0, hi = 1.0;

  double clamp01(double v) const { return (v - lo) / (hi - lo); }
};

// Largest of {1, 2, 5} x 10^k not above the raw step, so 4 to 8 ticks fit.
double nice_step(double range, int target_ticks) {
  const double raw = range / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (const double m : {5.0, 2.0, 1.0})
    if (m * mag <= raw * (1.0 + 1e-9)) return m * mag;
  return mag;
}

Range fit_range(double fixed_lo, double fixed_hi, double data_lo, double data_hi, bool pad) {
  if (fixed_lo < fixed_hi) return {fixed_lo, fixed_hi};
  double lo = data_lo, hi = data_hi;
  if (!(lo <= hi)) throw validation_error("chart has no finite data and no fixed axis range");
  if (lo == hi) {
    lo -= 1.0;
    hi += 1.0;
  } else if (pad) {
    const double m = 0.04 * (hi - lo);
    lo -= m;
    hi += m;
  }
  return {lo, hi};
}

class SvgBuilder {
 public:
  SvgBuilder(const ChartOptions& opt, Range xr, Range yr) : opt_(opt), xr_(xr), yr_(yr) {
    plot_w_ = opt.width - kMarginLeft - kMarginRight;
    plot_h_ = opt.height - kMarginTop - kMarginBottom;
    if (plot_w_ < 40 || plot_h_ < 40) throw validation_error("chart dimensions too small");
    out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) +
            "\" height=\"" + std::to_string(opt.height) + "\" viewBox=\"0 0 " +
            std::to_string(opt.width) + " " + std::to_string(opt.height) +
            "\" font-family=\"sans-serif\">\n";
    out_ += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  }

  double sx(double x) const { return kMarginLeft + xr_.clamp01(x) * plot_w_; }
  double sy(double y) const { return opt_.height - kMarginBottom - yr_.clamp01(y) * plot_h_; }

  void frame_and_ticks() {
    const double x0 = kMarginLeft, x1 = opt_.width - kMarginRight;
    const double y0 = kMarginTop, y1 = opt_.height - kMarginBottom;
    if (!opt_.title.empty())
      text(opt_.width / 2.0, 24, xml_escape(opt_.title), "middle", 16, "#111111");

    const double xstep = nice_step(xr_.hi - xr_.lo, 6);
    for (double t = std::ceil(xr_.lo / xstep - 1e-9) * xstep; t <= xr_.hi + 1e-9 * xstep;
         t += xstep) {
      const double gx = sx(t);
      line(gx, y0, gx, y1, "#dddddd", 1.0);
      text(gx, y1 + 18, tick_label(t), "middle", 11, "#333333");
    }
    const double ystep = nice_step(yr_.hi - yr_.lo, 5);
    for (double t = std::ceil(yr_.lo / ystep - 1e-9) * ystep; t <= yr_.hi + 1e-9 * ystep;
         t += ystep) {
      const double gy = sy(t);
      line(x0, gy, x1, gy, "#dddddd", 1.0);
      text(x0 - 8, gy + 4, tick_label(t), "end", 11, "#333333");
    }
    out_ += "<rect x=\"" + px(x0) + "\" y=\"" + px(y0) + "\" width=\"" + px(x1 - x0) +
            "\" height=\"" + px(y1 - y0) + "\" fill=\"none\" stroke=\"#444444\"/>\n";
    if (!opt_.x_label.empty())
      text((x0 + x1) / 2.0, opt_.height - 12, xml_escape(opt_.x_label), "middle", 13, "#111111");
    if (!opt_.y_label.empty()) {
      const double cy = (y0 + y1) / 2.0;
      out_ += "<text x=\"16\" y=\"" + px(cy) +
              "\" text-anchor=\"middle\" font-size=\"13\" fill=\"#111111\" transform=\"rotate(-90 "
              "16 " +
              px(cy) + ")\">" + xml_escape(opt_.y_label) + "</text>\n";
    }
  }

  void line(double ax, double ay, double bx, double by, const char* color, double width) {
    out_ += "<line x1=\"" + px(ax) + "\" y1=\"" + px(ay) + "\" x2=\"" + px(bx) + "\" y2=\"" +
            px(by) + "\" stroke=\"" + color + "\" stroke-width=\"" + px(width) + "\"/>\n";
  }

  void text(double x, double y, const std::string& body, const char* anchor, int size,
            const char* color) {
    out_ += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" text-anchor=\"" + anchor +
            "\" font-size=\"" + std::to_string(size) + "\" fill=\"" + color + "\">" + body +
            "</text>\n";
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const char* color) {
    if (xs.empty()) return;
    out_ += "<polyline fill=\"none\" stroke=\"";
    out_ += color;
    out_ += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) out_ += ' ';
      out_ += px(sx(xs[i]));
      out_ += ',';
      out_ += px(sy(ys[i]));
    }
    out_ += "\"/>\n";
  }

  void bar(double x, double y, double w, double h, const char* color) {
    out_ += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(w) + "\" height=\"" +
            px(h) + "\" fill=\"" + color + "\" fill-opacity=\"0.85\"/>\n";
  }

  void legend(const std::vector<std::string>& labels) {
    bool any = false;
    for (const auto& l : labels) any = any || !l.empty();
    if (!any) return;
    double y = kMarginTop + 16;
    const double x = opt_.width - kMarginRight - 150;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const char* color = kPalette[i % kPaletteSize];
      line(x, y - 4, x + 22, y - 4, color, 3);
      text(x + 28, y, xml_escape(labels[i]), "start", 12, "#111111");
      y += 18;
    }
  }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  ChartOptions opt_;
  Range xr_, yr_;
  double plot_w_ = 0.0, plot_h_ = 0.0;
  std::string out_;
};

}  // namespace

std::string line_chart(const std::vector<Series>& series, const ChartOptions& opt) {
  if (series.empty()) throw validation_error("line chart needs at least one series");
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw validation_error("series '" + s.label + "' has mismatched x/y lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        throw validation_error("series '" + s.label + "' holds a non-finite point");
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  SvgBuilder b(opt, fit_range(opt.x_lo, opt.x_hi, xlo, xhi, false),
               fit_range(opt.y_lo, opt.y_hi, ylo, yhi, true));
  b.frame_and_ticks();
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    b.polyline(series[i].x, series[i].y, kPalette[i % kPaletteSize]);
    labels.push_back(series[i].label);
  }
  b.legend(labels);
  return b.finish();
}

std::string bar_chart(double bin_lo, double bin_width, const std::vector<BarSeries>& series,
                      const ChartOptions& opt) {
  if (series.empty()) throw validation_error("bar chart needs at least one series");
  if (!(bin_width > 0.0) || !std::isfinite(bin_lo) || !std::isfinite(bin_width))
    throw validation_error("bar chart needs a positive finite bin width");
  const std::size_t bins = series.front().values.size();
  if (bins == 0) throw validation_error("bar chart needs at least one bin");
  double vmax = 0.0;
  for (const auto& s : series) {
    if (s.values.size() != bins)
      throw validation_error("series '" + s.label + "' bin count differs");
    for (const double v : s.values) {
      if (!std::isfinite(v) || v < 0.0)
        throw validation_error("series '" + s.label + "' holds a negative or non-finite value");
      vmax = std::max(vmax, v);
    }
  }
  if (vmax == 0.0) vmax = 1.0;

  ChartOptions o = opt;
  const Range xr{bin_lo, bin_lo + bin_width * static_cast<double>(bins)};
  const Range yr = fit_range(o.y_lo, o.y_hi, 0.0, vmax * 1.05, false);
  SvgBuilder b(o, xr, yr);
  b.frame_and_ticks();

  const std::size_t k = series.size();
  std::vector<std::string> labels;
  for (std::size_t si = 0; si < k; ++si) {
    const char* color = kPalette[si % kPaletteSize];
    for (std::size_t i = 0; i < bins; ++i) {
      const double v = series[si].values[i];
      if (v <= 0.0) continue;
      const double cell_l = b.sx(bin_lo + bin_width * static_cast<double>(i));
      const double cell_r = b.sx(bin_lo + bin_width * static_cast<double>(i + 1));
      const double slot = (cell_r - cell_l) * 0.8 / static_cast<double>(k);
      const double x = cell_l + (cell_r - cell_l) * 0.1 + slot * static_cast<double>(si);
      const double y_top = b.sy(std::min(v, yr.hi));
      const double y_base = b.sy(yr.lo);
      b.bar(x, y_top, slot, y_base - y_top, color);
    }
    labels.push_back(series[si].label);
  }
  b.legend(labels);
  return b.finish();
}

}  // namespace notewatch::svgplot
