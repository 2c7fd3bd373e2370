#include "twistorlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace twistorlab {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

SvgCanvas::SvgCanvas(double width, double height)
    : width_(width), height_(height) {}

void SvgCanvas::line(Vec2 a, Vec2 b, const std::string& stroke,
                     double stroke_width) {
  body_ += "<line x1=\"" + num(a.x) + "\" y1=\"" + num(a.y) + "\" x2=\"" +
           num(b.x) + "\" y2=\"" + num(b.y) + "\" stroke=\"" + stroke +
           "\" stroke-width=\"" + num(stroke_width) + "\"/>\n";
}

void SvgCanvas::polyline(const std::vector<Vec2>& pts,
                         const std::string& stroke, double stroke_width) {
  if (pts.size() < 2) return;
  body_ += "<polyline fill=\"none\" stroke=\"" + stroke +
           "\" stroke-width=\"" + num(stroke_width) + "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) body_ += ' ';
    body_ += num(pts[i].x) + "," + num(pts[i].y);
  }
  body_ += "\"/>\n";
}

void SvgCanvas::circle(Vec2 center, double radius, const std::string& stroke,
                       const std::string& fill) {
  body_ += "<circle cx=\"" + num(center.x) + "\" cy=\"" + num(center.y) +
           "\" r=\"" + num(radius) + "\" stroke=\"" + stroke + "\" fill=\"" +
           fill + "\"/>\n";
}

void SvgCanvas::rect(Vec2 corner, double w, double h, const std::string& fill) {
  body_ += "<rect x=\"" + num(corner.x) + "\" y=\"" + num(corner.y) +
           "\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"" +
           fill + "\"/>\n";
}

void SvgCanvas::text(Vec2 at, const std::string& s, double size) {
  body_ += "<text x=\"" + num(at.x) + "\" y=\"" + num(at.y) +
           "\" font-family=\"monospace\" font-size=\"" + num(size) + "\">" +
           s + "</text>\n";
}

std::string SvgCanvas::str() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) +
         "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " + num(width_) +
         " " + num(height_) + "\">\n<rect width=\"100%\" height=\"100%\" "
         "fill=\"white\"/>\n" +
         body_ + "</svg>\n";
}

void SvgCanvas::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << str();
}

std::string scattering_graph_svg(const ScatteringTable& table) {
  const double w = 640.0, h = 420.0, margin = 40.0;
  SvgCanvas svg(w, h);

  auto to_px = [&](double gamma, double value, double vmin, double vmax) {
    const double px = margin + (w - 2 * margin) * gamma / kPi;
    const double span = vmax - vmin > 1e-300 ? vmax - vmin : 1.0;
    const double py = h - margin - (h - 2 * margin) * (value - vmin) / span;
    return Vec2{px, py};
  };

  double vmin = 0.0, vmax = 0.0;
  for (const auto& e : table.entries) {
    if (e.status != RayStatus::Ok) continue;
    vmin = std::min(vmin, e.tau_tilde);
    vmax = std::max(vmax, e.tau_tilde);
  }

  svg.line({margin, h - margin}, {w - margin, h - margin}, "black", 1.0);
  svg.line({margin, margin}, {margin, h - margin}, "black", 1.0);
  svg.text({margin, margin - 8}, "exit time against incidence angle", 12.0);

  for (int i = 0; i < table.n_beta; ++i) {
    std::vector<Vec2> pts;
    for (int j = 0; j < table.n_gamma; ++j) {
      const auto& e =
          table.entries[static_cast<std::size_t>(i * table.n_gamma + j)];
      if (e.status != RayStatus::Ok) continue;
      pts.push_back(to_px(e.ray_in.gamma, e.tau_tilde, vmin, vmax));
    }
    const int shade = 40 + (160 * i) / std::max(1, table.n_beta - 1);
    svg.polyline(pts, "rgb(" + std::to_string(shade) + ",60,120)", 1.2);
  }
  return svg.str();
}

std::string heatmap_svg(int rows, int cols, const std::vector<double>& values,
                        const std::string& caption) {
  if (rows < 1 || cols < 1 ||
      values.size() != static_cast<std::size_t>(rows) *
                           static_cast<std::size_t>(cols)) {
    throw Error("heatmap_svg: size mismatch");
  }
  const double cell = 10.0, margin = 30.0;
  const double w = margin * 2 + cell * cols;
  const double h = margin * 2 + cell * rows + 14.0;
  SvgCanvas svg(w, h);

  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const double span = hi - lo > 1e-300 ? hi - lo : 1.0;

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v =
          (values[static_cast<std::size_t>(r * cols + c)] - lo) / span;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      const std::string fill = "rgb(" + std::to_string(shade) + "," +
                               std::to_string(shade) + ",255)";
      svg.rect({margin + cell * c, margin + cell * r}, cell, cell, fill);
    }
  }
  char extremes[96];
  std::snprintf(extremes, sizeof(extremes), "%s  [%.3g, %.3g]",
                caption.c_str(), lo, hi);
  svg.text({margin, margin + cell * rows + 12.0}, extremes, 11.0);
  return svg.str();
}

}  // namespace twistorlab
