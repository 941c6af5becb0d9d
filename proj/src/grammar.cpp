#include "cg/grammar.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace cg {
namespace {

constexpr std::array<std::string_view, 5> kKnownStyles = {"normal", "zigzag", "triangle", "square", "circle"};

// Integer division rounding half away from zero; den > 0.
std::int64_t round_div(std::int64_t num, std::int64_t den) {
  if (num >= 0) return (2 * num + den) / (2 * den);
  return -((-2 * num + den) / (2 * den));
}

// Parses exactly "D.DDD" with value <= 1.000. offset is the field's position in
// the whole token, used for error reporting.
UnitValue parse_field(std::string_view token, std::size_t offset, std::size_t length) {
  const std::string_view field = token.substr(offset, length);
  const std::string tok(token);
  if (field.empty()) throw MalformedToken(tok, offset, "empty numeric field");
  if (field.size() != 5 || field[1] != '.') {
    throw MalformedToken(tok, offset, "numeric field must have the form D.DDD");
  }
  int value = 0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (i == 1) continue;
    const char c = field[i];
    if (c < '0' || c > '9') throw MalformedToken(tok, offset + i, "non-numeric character");
    value = value * 10 + (c - '0');
  }
  if (value > 1000) throw MalformedToken(tok, offset, "value outside [0,1]");
  return UnitValue::from_thousandths(value);
}

void check_style(std::string_view token, std::size_t begin, std::size_t end) {
  const std::string_view style = token.substr(begin, end - begin);
  if (style.empty()) throw MalformedToken(std::string(token), begin, "empty style");
  for (std::size_t i = 0; i < style.size(); ++i) {
    const char c = style[i];
    if (!((c >= 'a' && c <= 'z') || c == '_')) {
      throw MalformedToken(std::string(token), begin + i, "style must be lowercase letters or '_'");
    }
  }
}

DegreeValue make_degrees(double degrees, std::int64_t tenths) { return DegreeValue{degrees, tenths}; }

}  // namespace

bool is_valid_style_token(std::string_view token) noexcept {
  if (token.empty()) return false;
  for (char c : token) {
    if (!((c >= 'a' && c <= 'z') || c == '_')) return false;
  }
  return true;
}

ActionStyle::ActionStyle(std::string token) : token_(std::move(token)) {
  if (!is_valid_style_token(token_)) {
    throw MalformedToken(token_, 0, "style must be lowercase letters or '_'");
  }
}

bool ActionStyle::is_known() const noexcept {
  for (auto s : kKnownStyles) {
    if (s == token_) return true;
  }
  return false;
}

UnitValue UnitValue::from_thousandths(int thousandths) {
  if (thousandths < 0 || thousandths > 1000) {
    throw Error(Errc::kOutOfRange, "normalized value " + std::to_string(thousandths) + "/1000 outside [0,1]");
  }
  return UnitValue(thousandths);
}

UnitValue UnitValue::from_double(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::kOutOfRange, "normalized value outside [0,1]");
  return UnitValue(static_cast<int>(std::lround(v * 1000.0)));
}

std::string UnitValue::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%d.%03d", milli_ / 1000, milli_ % 1000);
  return buf;
}

const ActionStyle& style_of(const BasicAction& a) {
  return std::visit([](const auto& x) -> const ActionStyle& { return x.style; }, a);
}

UnitValue turn_of(const BasicAction& a) {
  return std::visit([](const auto& x) { return x.turn; }, a);
}

std::size_t BongardImage::action_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : shapes) n += s.actions.size();
  return n;
}

std::string DegreeValue::magnitude_text() const {
  const std::int64_t mag = tenths < 0 ? -tenths : tenths;
  return std::to_string(mag / 10) + "." + std::to_string(mag % 10);
}

BasicAction parse_action(std::string_view token) {
  const std::string tok(token);
  std::size_t style_begin = 0;
  bool is_arc = false;
  if (token.starts_with("line_")) {
    style_begin = 5;
  } else if (token.starts_with("arc_")) {
    style_begin = 4;
    is_arc = true;
  } else {
    throw MalformedToken(tok, 0, "unknown kind prefix (expected 'line_' or 'arc_')");
  }

  // Numeric fields are anchored at the end so that styles may contain '_'.
  const std::size_t last_us = token.rfind('_');
  if (last_us == std::string_view::npos || last_us < style_begin) {
    throw MalformedToken(tok, style_begin, "missing numeric fields");
  }
  const std::size_t dash = token.find('-', last_us);
  if (dash == std::string_view::npos) throw MalformedToken(tok, last_us + 1, "missing '-TURN' field");
  if (token.find('-', dash + 1) != std::string_view::npos) {
    throw MalformedToken(tok, token.find('-', dash + 1), "too many '-' separators");
  }
  const UnitValue second = parse_field(token, last_us + 1, dash - last_us - 1);
  const UnitValue turn = parse_field(token, dash + 1, token.size() - dash - 1);

  if (!is_arc) {
    check_style(token, style_begin, last_us);
    return LineAction{ActionStyle(std::string(token.substr(style_begin, last_us - style_begin))), second, turn};
  }

  if (last_us == 0) throw MalformedToken(tok, style_begin, "arc requires RADIUS_SWEEP-TURN");
  const std::size_t prev_us = token.rfind('_', last_us - 1);
  if (prev_us == std::string_view::npos || prev_us < style_begin) {
    throw MalformedToken(tok, style_begin, "arc requires RADIUS_SWEEP-TURN");
  }
  const UnitValue radius = parse_field(token, prev_us + 1, last_us - prev_us - 1);
  check_style(token, style_begin, prev_us);
  return ArcAction{ActionStyle(std::string(token.substr(style_begin, prev_us - style_begin))), radius, second, turn};
}

std::string serialize_action(const BasicAction& action) {
  struct Visitor {
    std::string operator()(const LineAction& a) const {
      return "line_" + a.style.token() + "_" + a.length.to_string() + "-" + a.turn.to_string();
    }
    std::string operator()(const ArcAction& a) const {
      return "arc_" + a.style.token() + "_" + a.radius.to_string() + "_" + a.sweep.to_string() + "-" +
             a.turn.to_string();
    }
  };
  return std::visit(Visitor{}, action);
}

std::int64_t turn_tenths(UnitValue turn) noexcept {
  // (t - 0.5) * 360 degrees = (milli - 500) * 0.36 = (milli - 500) * 18 / 5 tenths
  return round_div(static_cast<std::int64_t>(turn.thousandths() - 500) * 18, 5);
}

std::int64_t sweep_tenths(UnitValue sweep) noexcept {
  return round_div(static_cast<std::int64_t>(sweep.thousandths() - 500) * 36, 5);
}

UnitValue turn_from_tenths(std::int64_t tenths) {
  const std::int64_t milli = 500 + round_div(tenths * 5, 18);
  if (milli < 0 || milli > 1000) throw Error(Errc::kOutOfRange, "turn of " + std::to_string(tenths) + " tenths");
  return UnitValue::from_thousandths(static_cast<int>(milli));
}

UnitValue sweep_from_tenths(std::int64_t tenths) {
  const std::int64_t milli = 500 + round_div(tenths * 5, 36);
  if (milli < 0 || milli > 1000) throw Error(Errc::kOutOfRange, "sweep of " + std::to_string(tenths) + " tenths");
  return UnitValue::from_thousandths(static_cast<int>(milli));
}

DegreeValue turn_to_degrees(UnitValue turn) {
  return make_degrees((turn.thousandths() - 500) * 0.36, turn_tenths(turn));
}

DegreeValue sweep_to_degrees(UnitValue sweep) {
  return make_degrees((sweep.thousandths() - 500) * 0.72, sweep_tenths(sweep));
}

DegreeValue turn_to_degrees(double turn_norm) {
  if (!(turn_norm >= 0.0 && turn_norm <= 1.0)) throw Error(Errc::kOutOfRange, "turn_norm outside [0,1]");
  const double deg = (turn_norm - 0.5) * 360.0;
  return make_degrees(deg, static_cast<std::int64_t>(std::round(deg * 10.0)));
}

DegreeValue sweep_to_degrees(double sweep_norm) {
  if (!(sweep_norm >= 0.0 && sweep_norm <= 1.0)) throw Error(Errc::kOutOfRange, "sweep_norm outside [0,1]");
  const double deg = (sweep_norm - 0.5) * 720.0;
  return make_degrees(deg, static_cast<std::int64_t>(std::round(deg * 10.0)));
}

BongardImage parse_image(const TokenImage& tokens) {
  if (tokens.empty()) throw Error(Errc::kEmptyShape, "image has no shapes");
  BongardImage image;
  image.shapes.reserve(tokens.size());
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    if (tokens[s].empty()) throw Error(Errc::kEmptyShape, "shape " + std::to_string(s) + " has no actions");
    OneStrokeShape shape;
    shape.actions.reserve(tokens[s].size());
    for (std::size_t a = 0; a < tokens[s].size(); ++a) {
      try {
        shape.actions.push_back(parse_action(tokens[s][a]));
      } catch (const MalformedToken& e) {
        throw e.at(static_cast<int>(s), static_cast<int>(a));
      }
    }
    image.shapes.push_back(std::move(shape));
  }
  return image;
}

TokenImage serialize_image(const BongardImage& image) {
  TokenImage out;
  out.reserve(image.shapes.size());
  for (const auto& shape : image.shapes) {
    TokenShape ts;
    ts.reserve(shape.actions.size());
    for (const auto& a : shape.actions) ts.push_back(serialize_action(a));
    out.push_back(std::move(ts));
  }
  return out;
}

std::vector<std::string> validate_image(const BongardImage& image) {
  std::vector<std::string> warnings;
  for (std::size_t s = 0; s < image.shapes.size(); ++s) {
    for (std::size_t a = 0; a < image.shapes[s].actions.size(); ++a) {
      const auto& action = image.shapes[s].actions[a];
      const std::string where = "shape " + std::to_string(s) + " action " + std::to_string(a);
      if (!style_of(action).is_known()) warnings.push_back(where + ": unknown style '" + style_of(action).token() + "'");
      if (const auto* arc = std::get_if<ArcAction>(&action)) {
        if (arc->radius.thousandths() == 0 && arc->sweep.thousandths() != 500) {
          warnings.push_back(where + ": degenerate arc (zero radius)");
        }
      }
    }
  }
  return warnings;
}

}  // namespace cg
