#include "kppfrag/io/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "kppfrag/errors.hpp"

namespace kppfrag::io {

namespace {

constexpr double kPanelW = 800.0;
constexpr double kPanelH = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
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

struct Frame {
  double x0, y0, w, h;  // plot area in canvas units
  double vmax;          // value mapped to the top edge
  double px(double x) const { return x0 + x * w; }
  double py(double v) const { return y0 + h - v / vmax * h; }
};

void axes(std::string& s, const Frame& f, const std::string& xlabel, const std::string& ylabel,
          bool value_ticks) {
  s += "<rect x=\"" + num(f.x0) + "\" y=\"" + num(f.y0) + "\" width=\"" + num(f.w) +
       "\" height=\"" + num(f.h) + "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    const double x = f.px(t);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(f.y0 + f.h) + "\" x2=\"" + num(x) +
         "\" y2=\"" + num(f.y0 + f.h + 5) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(f.y0 + f.h + 20) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + num(t).substr(0, 4) + "</text>\n";
    const double v = value_ticks ? t * f.vmax : t;
    const double y = value_ticks ? f.py(v) : f.y0 + f.h - t * f.h;
    s += "<line x1=\"" + num(f.x0 - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.x0) +
         "\" y2=\"" + num(y) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + num(f.x0 - 8) + "\" y=\"" + num(y + 4) +
         "\" font-size=\"12\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }
  s += "<text x=\"" + num(f.x0 + f.w / 2) + "\" y=\"" + num(f.y0 + f.h + 45) +
       "\" font-size=\"14\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
  s += "<text x=\"20\" y=\"" + num(f.y0 + f.h / 2) + "\" font-size=\"14\" text-anchor=\"middle\" "
       "transform=\"rotate(-90 20 " + num(f.y0 + f.h / 2) + ")\">" + escape(ylabel) +
       "</text>\n";
}

void polyline(std::string& s, const Frame& f, const ScalarField& v, const char* colour) {
  const Grid& g = v.grid();
  s += "<polyline fill=\"none\" stroke=\"";
  s += colour;
  s += "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < g.nx(); ++i) {
    if (i) s += ' ';
    s += num(f.px(g.x(i))) + "," + num(f.py(v[i]));
  }
  s += "\"/>\n";
}

std::string overlay_1d(const ResourceField& m, const ScalarField& theta,
                       const std::string& title) {
  const Grid& g = m.grid();
  const double vmax = std::max(m.kappa(), *std::max_element(theta.data().begin(),
                                                            theta.data().end())) * 1.05;
  const Frame f{kLeft, kTop, kPanelW - kLeft - kRight, kPanelH - kTop - kBottom, vmax};
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
       "viewBox=\"0 0 800 500\">\n";
  s += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  if (!title.empty()) {
    s += "<text x=\"400\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">" + escape(title) +
         "</text>\n";
  }

  // Shade [x_a - h/2, x_b + h/2] for each run of nodes with m > kappa/2.
  const double h = g.hx();
  const double half = 0.5 * m.kappa();
  for (std::size_t i = 0; i < g.nx();) {
    if (!(m[i] > half)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < g.nx() && m[j + 1] > half) ++j;
    const double a = std::max(0.0, g.x(i) - 0.5 * h);
    const double b = std::min(1.0, g.x(j) + 0.5 * h);
    s += "<rect class=\"high-resource\" x=\"" + num(f.px(a)) + "\" y=\"" + num(f.y0) +
         "\" width=\"" + num(f.px(b) - f.px(a)) + "\" height=\"" + num(f.h) +
         "\" fill=\"#cfe3f7\"/>\n";
    i = j + 1;
  }

  axes(s, f, "x", "value", true);
  polyline(s, f, m.field(), "#1f5fa8");
  polyline(s, f, theta, "#c0392b");
  s += "<line x1=\"620\" y1=\"70\" x2=\"650\" y2=\"70\" stroke=\"#1f5fa8\" stroke-width=\"2\"/>\n"
       "<text x=\"656\" y=\"74\" font-size=\"13\">m (resource)</text>\n"
       "<line x1=\"620\" y1=\"90\" x2=\"650\" y2=\"90\" stroke=\"#c0392b\" stroke-width=\"2\"/>\n"
       "<text x=\"656\" y=\"94\" font-size=\"13\">theta (population)</text>\n";
  s += "</svg>\n";
  return s;
}

// White -> dark blue ramp.
std::string colour(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 - t * (255 - 8)));
  const int gch = static_cast<int>(std::lround(255 - t * (255 - 48)));
  const int b = static_cast<int>(std::lround(255 - t * (255 - 107)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, gch, b);
  return buf;
}

void heatmap(std::string& s, double offset, const ScalarField& v, double vmax,
             const std::string& label) {
  const Grid& g = v.grid();
  const double side = std::min(kPanelW - kLeft - kRight, kPanelH - kTop - kBottom);
  const Frame f{offset + kLeft, kTop, side, side, 1.0};
  // Cell (ix, iy) covers the dual cell of the node, clipped to the square.
  auto edge = [](std::size_t i, std::size_t n) {
    const double h = 1.0 / static_cast<double>(n - 1);
    return std::clamp((static_cast<double>(i) - 0.5) * h, 0.0, 1.0);
  };
  s += "<g class=\"heatmap\">\n";
  for (std::size_t iy = 0; iy < g.ny(); ++iy) {
    const double y_lo = edge(iy, g.ny());
    const double y_hi = edge(iy + 1, g.ny());
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      const double x_lo = edge(ix, g.nx());
      const double x_hi = edge(ix + 1, g.nx());
      s += "<rect x=\"" + num(f.x0 + x_lo * side) + "\" y=\"" + num(f.y0 + (1.0 - y_hi) * side) +
           "\" width=\"" + num((x_hi - x_lo) * side) + "\" height=\"" +
           num((y_hi - y_lo) * side) + "\" fill=\"" + colour(v[g.index(ix, iy)] / vmax) + "\"/>\n";
    }
  }
  s += "</g>\n";
  axes(s, f, "x", "y", false);
  s += "<text x=\"" + num(f.x0 + side / 2) + "\" y=\"" + num(kTop - 12) +
       "\" font-size=\"15\" text-anchor=\"middle\">" + escape(label) + "</text>\n";

  // Colour bar.
  const double bx = f.x0 + side + 40;
  for (int i = 0; i < 20; ++i) {
    const double y = f.y0 + side - (i + 1) * side / 20;
    s += "<rect x=\"" + num(bx) + "\" y=\"" + num(y) + "\" width=\"20\" height=\"" +
         num(side / 20) + "\" fill=\"" + colour((i + 0.5) / 20) + "\"/>\n";
  }
  s += "<text x=\"" + num(bx + 26) + "\" y=\"" + num(f.y0 + 10) + "\" font-size=\"12\">" +
       num(vmax) + "</text>\n";
  s += "<text x=\"" + num(bx + 26) + "\" y=\"" + num(f.y0 + side) + "\" font-size=\"12\">0.000"
       "</text>\n";
}

std::string heatmaps_2d(const ResourceField& m, const ScalarField& theta,
                        const std::string& title) {
  const double vmax = std::max(m.kappa(), *std::max_element(theta.data().begin(),
                                                            theta.data().end()));
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1600\" height=\"500\" "
       "viewBox=\"0 0 1600 500\">\n";
  s += "<rect width=\"1600\" height=\"500\" fill=\"white\"/>\n";
  if (!title.empty()) {
    s += "<text x=\"800\" y=\"18\" font-size=\"16\" text-anchor=\"middle\">" + escape(title) +
         "</text>\n";
  }
  heatmap(s, 0.0, m.field(), vmax, "m (resource)");
  heatmap(s, kPanelW, theta, vmax, "theta (population)");
  s += "</svg>\n";
  return s;
}

}  // namespace

std::string render_plot_svg(const ResourceField& m, const ScalarField& theta,
                            const std::string& title) {
  if (!(m.grid() == theta.grid())) throw InvalidArgument("plot: m and theta on different grids");
  std::string body = m.grid().dim() == 1 ? overlay_1d(m, theta, title)
                                         : heatmaps_2d(m, theta, title);
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" + body;
}

void emit_plot(const ResourceField& m, const ScalarField& theta,
               const std::filesystem::path& path, const std::string& title) {
  const std::string svg = render_plot_svg(m, theta, title);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << svg;
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace kppfrag::io
