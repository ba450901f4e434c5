#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rfprox/matrix.hpp"
#include "rfprox/metrics.hpp"

namespace rfprox::cli {

std::string xml_escape(const std::string& text);

// Accumulates SVG elements; coordinates are in pixels with y pointing down.
class SvgCanvas {
 public:
  using Attrs = std::vector<std::pair<std::string, std::string>>;

  SvgCanvas(double width, double height);

  void circle(double cx, double cy, double r, const std::string& fill, const Attrs& extra = {});
  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
            const std::string& dash = "");
  void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke = "none");
  void text(double x, double y, const std::string& s, const std::string& anchor = "start", double size = 12.0);
  void polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke);

  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  double width_;
  double height_;
  std::ostringstream body_;
};

// Linear map from a data interval onto a pixel interval.
struct Axis {
  double lo = 0.0, hi = 1.0;
  double px_lo = 0.0, px_hi = 1.0;
  double operator()(double v) const;
};

std::string class_color(std::size_t c);
inline constexpr const char* kOutlierColor = "#d62728";

struct ScatterPoint {
  std::size_t record_id = 0;
  double x = 0.0;
  double y = 0.0;
  int label = 0;
  bool flagged = false;
};

// Outlier measure (x) against class (rows). Infinite measures are drawn at
// the right edge. Each point carries data-record-id and data-value.
std::string outlier_scatter_svg(std::span<const ScatterPoint> points, std::span<const std::string> class_names,
                                std::span<const double> thresholds);

// 2-D embedding; flagged points are drawn red with a dark ring.
std::string embedding_svg(std::span<const ScatterPoint> points, std::span<const std::string> class_names,
                          const std::string& title);

// log10 of the outlier measure against every class, with each class's threshold.
std::string profile_svg(std::size_t record_id, std::span<const std::string> class_names,
                        std::span<const double> profile, std::span<const double> thresholds);

// One group of four boxes (quartiles 1..4) per class.
std::string quartile_boxes_svg(std::span<const std::string> class_names,
                               const std::vector<std::vector<BoxStats>>& boxes, const std::string& y_label);

}  // namespace rfprox::cli
