#include "cg/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace cg {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

Point direction(double heading_deg) {
  const double h = heading_deg * kDegToRad;
  return {-std::sin(h), std::cos(h)};
}

Point rotate_about(Point p, Point c, double deg) {
  const double a = deg * kDegToRad;
  const double dx = p.x - c.x;
  const double dy = p.y - c.y;
  return {c.x + dx * std::cos(a) - dy * std::sin(a), c.y + dx * std::sin(a) + dy * std::cos(a)};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

void step(TurtleState& t, const BasicAction& action, double scale, ShapeTrace& out,
          std::vector<std::string>& warnings) {
  if (const auto* line = std::get_if<LineAction>(&action)) {
    const Point d = direction(t.heading);
    const double len = line->length.value() * scale;
    Segment seg{Segment::Kind::kLine, line->style.token(), t.position, {t.position.x + d.x * len, t.position.y + d.y * len}, {}};
    t.position = seg.to;
    out.segments.push_back(std::move(seg));
  } else {
    const auto& arc = std::get<ArcAction>(action);
    const double sweep = sweep_to_degrees(arc.sweep).degrees;
    const double r = arc.radius.value() * scale;
    if (r == 0.0 && sweep != 0.0) {
      warnings.push_back("degenerate arc (zero radius) rendered as a point");
      out.segments.push_back({Segment::Kind::kPoint, arc.style.token(), t.position, t.position, {}});
    } else if (sweep != 0.0) {
      const double h = t.heading * kDegToRad;
      const double sign = sweep > 0 ? 1.0 : -1.0;
      const Point left{-std::cos(h), -std::sin(h)};
      const Point center{t.position.x + sign * r * left.x, t.position.y + sign * r * left.y};
      Segment seg{Segment::Kind::kArc, arc.style.token(), t.position, rotate_about(t.position, center, sweep), center,
                  r, sweep};
      t.position = seg.to;
      out.segments.push_back(std::move(seg));
    }
    t.heading += sweep;
  }
  t.heading += turn_to_degrees(turn_of(action)).degrees;
}

}  // namespace

ImageTrace trace_image(const BongardImage& image, double scale, Point origin) {
  ImageTrace trace;
  for (const auto& shape : image.shapes) {
    ShapeTrace st;
    st.start = TurtleState{origin, 0.0};
    TurtleState t = st.start;
    for (const auto& action : shape.actions) step(t, action, scale, st, trace.warnings);
    st.end = t;
    trace.shapes.push_back(std::move(st));
  }
  return trace;
}

std::string render_svg(const BongardImage& image, const SvgOptions& options) {
  if (options.canvas_size <= 0) throw Error(Errc::kPrecondition, "canvas_size must be positive");
  if (!(options.scale > 0.0)) throw Error(Errc::kPrecondition, "scale must be positive");

  const double c = options.canvas_size / 2.0;
  const ImageTrace trace = trace_image(image, options.scale, {0.0, 0.0});
  auto X = [&](double x) { return num(c + x); };
  auto Y = [&](double y) { return num(c - y); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(options.canvas_size) +
         "\" height=\"" + std::to_string(options.canvas_size) + "\" viewBox=\"0 0 " +
         std::to_string(options.canvas_size) + " " + std::to_string(options.canvas_size) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t s = 0; s < trace.shapes.size(); ++s) {
    svg += "<g class=\"shape\" id=\"shape-" + std::to_string(s) + "\" fill=\"none\" stroke=\"black\" stroke-width=\"" +
           num(options.stroke_width) + "\">\n";
    for (const auto& seg : trace.shapes[s].segments) {
      std::string d = "M " + X(seg.from.x) + " " + Y(seg.from.y);
      switch (seg.kind) {
        case Segment::Kind::kLine:
          d += " L " + X(seg.to.x) + " " + Y(seg.to.y);
          break;
        case Segment::Kind::kPoint:
          d += " l 0 0";
          break;
        case Segment::Kind::kArc: {
          // SVG arcs cannot express sweeps of 360 degrees; emit pieces of at most 180.
          const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(seg.sweep) / 180.0 - 1e-9)));
          const double piece = seg.sweep / pieces;
          Point p = seg.from;
          for (int i = 0; i < pieces; ++i) {
            const Point next = rotate_about(p, seg.center, piece);
            d += " A " + num(seg.radius) + " " + num(seg.radius) + " 0 0 " + (seg.sweep > 0 ? "0" : "1") + " " +
                 X(next.x) + " " + Y(next.y);
            p = next;
          }
          break;
        }
      }
      svg += "<path class=\"stroke-" + seg.style + "\" d=\"" + d + "\"/>\n";
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace cg
