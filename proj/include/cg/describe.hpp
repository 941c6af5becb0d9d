#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cg/grammar.hpp"

namespace cg {

// Step-by-step English rendering of one image: a header line, one line per
// action, and a footer line.
struct ActionDescription {
  int figure_index = 1;
  std::vector<std::string> lines;

  // Lines joined with '\n', no trailing newline.
  std::string text() const;
};

inline constexpr std::string_view kDescriptionFooter = "The figure is now complete.";
std::string description_header(int figure_index);

// Steps are numbered continuously across the shapes of the image.
ActionDescription render_description(const BongardImage& image, int figure_index = 1);

// Inverse of render_description. All recovered actions land in a single shape
// (the text carries no shape boundaries) and sweeps are recovered as
// counterclockwise. Accepts LF or CRLF and one trailing newline.
BongardImage parse_description(std::string_view text);

}  // namespace cg
