#pragma once

#include <string>
#include <vector>

#include "twistorlab/flow.hpp"
#include "twistorlab/util.hpp"

namespace twistorlab {

// Minimal SVG assembly; enough for scattering graphs and residual maps.
class SvgCanvas {
 public:
  SvgCanvas(double width, double height);

  void line(Vec2 a, Vec2 b, const std::string& stroke, double stroke_width);
  void polyline(const std::vector<Vec2>& pts, const std::string& stroke,
                double stroke_width);
  void circle(Vec2 center, double radius, const std::string& stroke,
              const std::string& fill);
  void rect(Vec2 corner, double w, double h, const std::string& fill);
  void text(Vec2 at, const std::string& s, double size);

  std::string str() const;
  void write(const std::string& path) const;

 private:
  double width_;
  double height_;
  std::string body_;
};

// Exit angle and exit time against the incidence angle, one polyline per
// entry meridian. Skips non-transversal rows.
std::string scattering_graph_svg(const ScatteringTable& table);

// Row-major scalar field on [0,1]^2 rendered as a grayscale cell grid with
// linear normalization; annotates the extremes.
std::string heatmap_svg(int rows, int cols, const std::vector<double>& values,
                        const std::string& caption);

}  // namespace twistorlab
