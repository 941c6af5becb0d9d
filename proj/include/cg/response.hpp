#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "cg/dataset.hpp"
#include "cg/prompt.hpp"

namespace cg {

struct ParsedAnswer {
  std::string analysis;
  std::string rule;
  std::string test_image;
  Label conclusion = Label::kPos;
  friend bool operator==(const ParsedAnswer&, const ParsedAnswer&) = default;
};

// No usable conclusion. Scored as an incorrect answer downstream.
struct ParseFailure {
  std::string reason;
  std::string raw_sha256;
};

using ExtractResult = std::variant<ParsedAnswer, ParseFailure>;

// Finds the first balanced JSON object carrying a "Conclusion" key anywhere in
// the raw output (code fences and surrounding prose are skipped) and
// normalizes the conclusion for the dialect:
//   pos/neg:  "pos", "positive" -> pos; "neg", "negative" -> neg (any case)
//   cat:      "cat_2" -> pos, "cat_1" -> neg, optionally followed by " (...)"
ExtractResult extract_answer(std::string_view raw, Dialect dialect = Dialect::kPosNeg);

// Canonical JSON object with the four schema keys.
std::string serialize_answer(const ParsedAnswer& a);

}  // namespace cg
