#include "rfprox/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "rfprox/data/csv.hpp"
#include "rfprox/errors.hpp"

namespace rfprox::cli {

namespace {

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

constexpr double kMargin = 60.0;

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

SvgCanvas::SvgCanvas(double width, double height) : width_(width), height_(height) {}

void SvgCanvas::circle(double cx, double cy, double r, const std::string& fill, const Attrs& extra) {
  body_ << "<circle cx=\"" << px(cx) << "\" cy=\"" << px(cy) << "\" r=\"" << px(r) << "\" fill=\"" << fill << '"';
  for (const auto& [k, v] : extra) body_ << ' ' << k << "=\"" << xml_escape(v) << '"';
  body_ << "/>\n";
}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& stroke, double width,
                     const std::string& dash) {
  body_ << "<line x1=\"" << px(x1) << "\" y1=\"" << px(y1) << "\" x2=\"" << px(x2) << "\" y2=\"" << px(y2)
        << "\" stroke=\"" << stroke << "\" stroke-width=\"" << px(width) << '"';
  if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << '"';
  body_ << "/>\n";
}

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke) {
  body_ << "<rect x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(w) << "\" height=\"" << px(h)
        << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& s, const std::string& anchor, double size) {
  body_ << "<text x=\"" << px(x) << "\" y=\"" << px(y) << "\" font-family=\"sans-serif\" font-size=\"" << px(size)
        << "\" text-anchor=\"" << anchor << "\">" << xml_escape(s) << "</text>\n";
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke) {
  body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" points=\"";
  for (std::size_t k = 0; k < points.size(); ++k) body_ << (k ? " " : "") << px(points[k].first) << ',' << px(points[k].second);
  body_ << "\"/>\n";
}

std::string SvgCanvas::str() const {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width_) << "\" height=\"" << px(height_)
      << "\" viewBox=\"0 0 " << px(width_) << ' ' << px(height_) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << px(width_) << "\" height=\"" << px(height_) << "\" fill=\"white\"/>\n"
      << body_.str() << "</svg>\n";
  return out.str();
}

void SvgCanvas::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << str();
}

double Axis::operator()(double v) const {
  if (hi == lo) return (px_lo + px_hi) / 2.0;
  return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
}

std::string class_color(std::size_t c) {
  static const char* palette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2",
                                  "#7f7f7f", "#bcbd22", "#17becf", "#ff7f0e", "#393b79"};
  return palette[c % (sizeof palette / sizeof palette[0])];
}

namespace {

std::pair<double, double> finite_range(std::span<const ScatterPoint> points, bool use_y) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : points) {
    const double v = use_y ? p.y : p.x;
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo > hi) return {0.0, 1.0};
  if (lo == hi) return {lo - 1.0, hi + 1.0};
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

// Deterministic vertical jitter from the record id.
double jitter(std::size_t id) {
  std::uint64_t h = id * 0x9e3779b97f4a7c15ULL;
  h ^= h >> 29;
  return static_cast<double>(h % 1000) / 1000.0 - 0.5;
}

}  // namespace

std::string outlier_scatter_svg(std::span<const ScatterPoint> points, std::span<const std::string> class_names,
                                std::span<const double> thresholds) {
  const double row_h = 60.0;
  const double width = 900.0;
  const double height = kMargin * 2 + row_h * static_cast<double>(std::max<std::size_t>(class_names.size(), 1));
  SvgCanvas svg(width, height);
  auto [lo, hi] = finite_range(points, false);
  const bool any_inf = std::any_of(points.begin(), points.end(), [](const ScatterPoint& p) { return std::isinf(p.x); });
  const Axis x{lo, hi, kMargin + 100.0, width - kMargin - (any_inf ? 40.0 : 0.0)};
  const auto row_y = [&](int c) { return kMargin + row_h * (static_cast<double>(c) + 0.5); };

  svg.text(width / 2, 30, "Outlier measure by assigned class", "middle", 16);
  svg.line(x.px_lo, height - kMargin, x.px_hi, height - kMargin, "black");
  svg.text(x.px_lo, height - kMargin + 20, format_double(lo), "middle", 10);
  svg.text(x.px_hi, height - kMargin + 20, format_double(hi), "middle", 10);
  svg.text((x.px_lo + x.px_hi) / 2, height - 15, "outlier measure", "middle", 12);
  if (any_inf) svg.text(width - kMargin, height - kMargin + 20, "inf", "middle", 10);
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    const double y = row_y(static_cast<int>(c));
    svg.text(kMargin + 90, y + 4, class_names[c], "end", 12);
    if (c < thresholds.size() && std::isfinite(thresholds[c]) && thresholds[c] >= lo && thresholds[c] <= hi)
      svg.line(x(thresholds[c]), y - row_h / 2 + 4, x(thresholds[c]), y + row_h / 2 - 4, kOutlierColor, 1.0, "4,3");
  }
  for (const auto& p : points) {
    const double cx = std::isinf(p.x) ? width - kMargin : x(p.x);
    const double cy = row_y(p.label) + jitter(p.record_id) * row_h * 0.6;
    svg.circle(cx, cy, 3.0, p.flagged ? kOutlierColor : class_color(static_cast<std::size_t>(p.label)),
               {{"data-record-id", std::to_string(p.record_id)},
                {"data-value", format_double(p.x)},
                {"data-flag", p.flagged ? "1" : "0"}});
  }
  return svg.str();
}

std::string embedding_svg(std::span<const ScatterPoint> points, std::span<const std::string> class_names,
                          const std::string& title) {
  const double size = 700.0;
  SvgCanvas svg(size + 160.0, size);
  auto [xlo, xhi] = finite_range(points, false);
  auto [ylo, yhi] = finite_range(points, true);
  // Same scale on both axes so distances are not distorted.
  const double span = std::max(xhi - xlo, yhi - ylo);
  const double xc = (xlo + xhi) / 2, yc = (ylo + yhi) / 2;
  const Axis x{xc - span / 2, xc + span / 2, kMargin, size - kMargin};
  const Axis y{yc - span / 2, yc + span / 2, size - kMargin, kMargin};
  svg.text(size / 2, 30, title, "middle", 16);
  svg.rect(kMargin, kMargin, size - 2 * kMargin, size - 2 * kMargin, "none", "#999999");
  for (const auto& p : points) {
    SvgCanvas::Attrs attrs{{"data-record-id", std::to_string(p.record_id)},
                           {"data-x", format_double(p.x)},
                           {"data-y", format_double(p.y)},
                           {"data-flag", p.flagged ? "1" : "0"}};
    if (p.flagged) attrs.emplace_back("stroke", "black");
    svg.circle(x(p.x), y(p.y), p.flagged ? 4.5 : 3.0,
               p.flagged ? kOutlierColor : class_color(static_cast<std::size_t>(p.label)), attrs);
  }
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    const double ly = kMargin + 20.0 * static_cast<double>(c);
    svg.circle(size + 10, ly - 4, 4, class_color(c));
    svg.text(size + 20, ly, class_names[c]);
  }
  const double ly = kMargin + 20.0 * static_cast<double>(class_names.size());
  svg.circle(size + 10, ly - 4, 4, kOutlierColor);
  svg.text(size + 20, ly, "outlier");
  return svg.str();
}

std::string profile_svg(std::size_t record_id, std::span<const std::string> class_names,
                        std::span<const double> profile, std::span<const double> thresholds) {
  const double width = std::max(500.0, 60.0 * static_cast<double>(class_names.size()) + 2 * kMargin);
  const double height = 420.0;
  SvgCanvas svg(width, height);
  // Measures can be negative or zero; plot log10(max(O, 1e-3)).
  const auto lg = [](double v) { return std::isinf(v) ? (v > 0 ? 6.0 : -3.0) : std::log10(std::max(v, 1e-3)); };
  double lo = 0.0, hi = 1.0;
  for (std::size_t c = 0; c < profile.size(); ++c) {
    lo = std::min({lo, lg(profile[c]), c < thresholds.size() ? lg(thresholds[c]) : lo});
    hi = std::max({hi, lg(profile[c]), c < thresholds.size() ? lg(thresholds[c]) : hi});
  }
  const Axis y{lo, hi, height - kMargin, kMargin};
  const double step = (width - 2 * kMargin) / static_cast<double>(std::max<std::size_t>(profile.size(), 1));
  svg.text(width / 2, 30, "Outlier measure of record " + std::to_string(record_id) + " against every class", "middle", 14);
  svg.line(kMargin, height - kMargin, width - kMargin, height - kMargin, "black");
  svg.line(kMargin, kMargin, kMargin, height - kMargin, "black");
  svg.text(20, kMargin - 10, "log10 O", "start", 11);
  std::vector<std::pair<double, double>> line;
  for (std::size_t c = 0; c < profile.size(); ++c) {
    const double cx = kMargin + step * (static_cast<double>(c) + 0.5);
    if (c < thresholds.size()) svg.line(cx - step * 0.3, y(lg(thresholds[c])), cx + step * 0.3, y(lg(thresholds[c])), kOutlierColor, 1.0, "4,3");
    line.emplace_back(cx, y(lg(profile[c])));
    svg.circle(cx, y(lg(profile[c])), 4, class_color(c),
               {{"data-class", class_names[c]}, {"data-value", format_double(profile[c])}});
    svg.text(cx, height - kMargin + 16, class_names[c], "middle", 10);
  }
  svg.polyline(line, "#444444");
  return svg.str();
}

std::string quartile_boxes_svg(std::span<const std::string> class_names,
                               const std::vector<std::vector<BoxStats>>& boxes, const std::string& y_label) {
  const double group_w = 220.0;
  const double width = 2 * kMargin + group_w * static_cast<double>(std::max<std::size_t>(class_names.size(), 1));
  const double height = 460.0;
  SvgCanvas svg(width, height);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& cls : boxes)
    for (const auto& b : cls) {
      if (b.n == 0) continue;
      lo = std::min({lo, b.min, b.whisker_low});
      hi = std::max({hi, b.max, b.whisker_high});
    }
  if (!(lo < hi)) { lo = 0.0; hi = 1.0; }
  lo = std::max(lo, hi - 2.0 * (hi - lo));
  const Axis y{lo, hi, height - kMargin, kMargin};
  svg.text(width / 2, 30, y_label + " by outlier-score quartile", "middle", 16);
  svg.line(kMargin, kMargin, kMargin, height - kMargin, "black");
  svg.text(kMargin - 5, y(hi) + 4, format_double(hi), "end", 10);
  svg.text(kMargin - 5, y(lo) + 4, format_double(lo), "end", 10);
  for (std::size_t c = 0; c < class_names.size() && c < boxes.size(); ++c) {
    const double gx = kMargin + group_w * static_cast<double>(c);
    svg.text(gx + group_w / 2, height - kMargin + 35, class_names[c], "middle", 12);
    for (std::size_t q = 0; q < boxes[c].size(); ++q) {
      const auto& b = boxes[c][q];
      const double cx = gx + 30.0 + 45.0 * static_cast<double>(q);
      svg.text(cx, height - kMargin + 16, "Q" + std::to_string(q + 1), "middle", 10);
      if (b.n == 0) continue;
      const double low = std::max(b.whisker_low, b.min);
      const double high = std::min(b.whisker_high, b.max);
      svg.line(cx, y(low), cx, y(b.q1), "black");
      svg.line(cx, y(b.q3), cx, y(high), "black");
      svg.rect(cx - 14, y(b.q3), 28, std::max(y(b.q1) - y(b.q3), 0.5), class_color(c), "black");
      svg.line(cx - 14, y(b.median), cx + 14, y(b.median), "black", 2.0);
      for (double o : b.outliers) svg.circle(cx, y(std::max(o, lo)), 2.0, "none", {{"stroke", "black"}, {"data-value", format_double(o)}});
    }
  }
  return svg.str();
}

}  // namespace rfprox::cli
