#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cg/error.hpp"

namespace cg {

// Stroke style carried verbatim from the token (normal, zigzag, triangle, ...).
class ActionStyle {
 public:
  ActionStyle() = default;
  explicit ActionStyle(std::string token);

  const std::string& token() const noexcept { return token_; }
  bool is_known() const noexcept;

  friend auto operator<=>(const ActionStyle&, const ActionStyle&) = default;

 private:
  std::string token_ = "normal";
};

bool is_valid_style_token(std::string_view token) noexcept;

// A normalized parameter in [0, 1], stored as exact thousandths so that
// re-serialization is byte-identical to the source token.
class UnitValue {
 public:
  constexpr UnitValue() = default;
  static UnitValue from_thousandths(int thousandths);
  static UnitValue from_double(double v);  // rounds to the nearest thousandth

  constexpr int thousandths() const noexcept { return milli_; }
  constexpr double value() const noexcept { return milli_ / 1000.0; }
  std::string to_string() const;  // "0.300"

  friend constexpr auto operator<=>(UnitValue, UnitValue) = default;

 private:
  constexpr explicit UnitValue(int m) : milli_(m) {}
  int milli_ = 0;
};

struct LineAction {
  ActionStyle style;
  UnitValue length;
  UnitValue turn;
  friend auto operator<=>(const LineAction&, const LineAction&) = default;
};

struct ArcAction {
  ActionStyle style;
  UnitValue radius;
  UnitValue sweep;
  UnitValue turn;
  friend auto operator<=>(const ArcAction&, const ArcAction&) = default;
};

using BasicAction = std::variant<LineAction, ArcAction>;

const ActionStyle& style_of(const BasicAction& a);
UnitValue turn_of(const BasicAction& a);

struct OneStrokeShape {
  std::vector<BasicAction> actions;
  friend bool operator==(const OneStrokeShape&, const OneStrokeShape&) = default;
};

struct BongardImage {
  std::vector<OneStrokeShape> shapes;

  std::size_t action_count() const noexcept;
  friend bool operator==(const BongardImage&, const BongardImage&) = default;
};

// Signed angle in degrees, positive = left/counterclockwise. tenths holds the
// value rounded half away from zero to one decimal; it is exact for angles
// derived from thousandth-quantized parameters.
struct DegreeValue {
  double degrees = 0.0;
  std::int64_t tenths = 0;

  // "119.9" style, magnitude only, one decimal.
  std::string magnitude_text() const;
};

BasicAction parse_action(std::string_view token);
std::string serialize_action(const BasicAction& action);

DegreeValue turn_to_degrees(UnitValue turn);
DegreeValue sweep_to_degrees(UnitValue sweep);
// Overloads for raw doubles; throw OutOfRange outside [0, 1].
DegreeValue turn_to_degrees(double turn_norm);
DegreeValue sweep_to_degrees(double sweep_norm);

// Exact tenth-degree values for quantized parameters (integer arithmetic).
std::int64_t turn_tenths(UnitValue turn) noexcept;
std::int64_t sweep_tenths(UnitValue sweep) noexcept;
// Inverse: nearest representable parameter for a tenth-degree value.
UnitValue turn_from_tenths(std::int64_t tenths);
UnitValue sweep_from_tenths(std::int64_t tenths);

using TokenShape = std::vector<std::string>;
using TokenImage = std::vector<TokenShape>;

BongardImage parse_image(const TokenImage& tokens);
TokenImage serialize_image(const BongardImage& image);

// Non-fatal findings such as unknown style tokens.
std::vector<std::string> validate_image(const BongardImage& image);

}  // namespace cg
