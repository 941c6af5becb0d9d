#pragma once

#include <string>
#include <vector>

#include "cg/grammar.hpp"

namespace cg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Heading in degrees: 0 points up, counterclockwise positive. Coordinates are
// canvas units with y pointing up; the SVG writer flips y.
struct TurtleState {
  Point position;
  double heading = 0.0;
};

struct Segment {
  enum class Kind { kLine, kArc, kPoint } kind = Kind::kLine;
  std::string style;
  Point from;
  Point to;
  Point center;         // arcs only
  double radius = 0.0;  // arcs only, canvas units
  double sweep = 0.0;   // arcs only, signed degrees (positive = counterclockwise)
};

struct ShapeTrace {
  std::vector<Segment> segments;
  TurtleState start;
  TurtleState end;
};

struct ImageTrace {
  std::vector<ShapeTrace> shapes;
  std::vector<std::string> warnings;
};

// Runs the turtle over every shape. Each shape starts from `origin` facing up.
ImageTrace trace_image(const BongardImage& image, double scale, Point origin = {});

struct SvgOptions {
  int canvas_size = 512;   // pixels, square
  double scale = 100.0;    // pixels per unit length
  double stroke_width = 2.0;
};

// Deterministic SVG 1.1 text. Throws PreconditionViolation for non-positive
// canvas size or scale.
std::string render_svg(const BongardImage& image, const SvgOptions& options = {});

}  // namespace cg
