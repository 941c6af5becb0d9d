#include "cg/response.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include <nlohmann/json.hpp>

#include "cg/hash.hpp"

namespace cg {
namespace {

using nlohmann::json;

// End index (inclusive) of the object starting at text[open], honoring string
// literals and escapes; npos when unbalanced.
std::size_t matching_brace(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

std::string lower_trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::optional<Label> normalize(const std::string& value, Dialect dialect) {
  const std::string v = lower_trim(value);
  if (dialect == Dialect::kPosNeg) {
    if (v == "pos" || v == "positive") return Label::kPos;
    if (v == "neg" || v == "negative") return Label::kNeg;
    return std::nullopt;
  }
  for (auto [tag, label] : {std::pair{"cat_2", Label::kPos}, std::pair{"cat_1", Label::kNeg}}) {
    const std::string_view t = tag;
    if (v == t) return label;
    if (v.starts_with(t) && (v[t.size()] == ' ' || v[t.size()] == '(')) {
      const std::string rest = lower_trim(v.substr(t.size()));
      if (rest.empty() || (rest.front() == '(' && rest.back() == ')')) return label;
    }
  }
  return std::nullopt;
}

const json* find_key(const json& obj, std::string_view key) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (lower_trim(it.key()) == lower_trim(std::string(key))) return &it.value();
  }
  return nullptr;
}

std::string text_field(const json& obj, std::string_view key) {
  const json* v = find_key(obj, key);
  if (!v || v->is_null()) return {};
  return v->is_string() ? v->get<std::string>() : v->dump();
}

}  // namespace

ExtractResult extract_answer(std::string_view raw, Dialect dialect) {
  std::string reason = "no JSON object with a Conclusion key";
  for (std::size_t open = raw.find('{'); open != std::string_view::npos; open = raw.find('{', open + 1)) {
    const std::size_t close = matching_brace(raw, open);
    if (close == std::string_view::npos) continue;
    const json obj = json::parse(raw.substr(open, close - open + 1), nullptr, false, true);
    if (obj.is_discarded() || !obj.is_object()) continue;
    const json* conclusion = find_key(obj, "Conclusion");
    if (!conclusion) continue;
    // The first object with a Conclusion decides, valid or not.
    if (!conclusion->is_string()) return ParseFailure{"Conclusion is not a string", sha256_hex(raw)};
    const auto label = normalize(conclusion->get<std::string>(), dialect);
    if (!label) {
      return ParseFailure{"unrecognized Conclusion '" + conclusion->get<std::string>() + "'", sha256_hex(raw)};
    }
    return ParsedAnswer{text_field(obj, "Analysis"), text_field(obj, "Rule"), text_field(obj, "Test Image"), *label};
  }
  return ParseFailure{reason, sha256_hex(raw)};
}

std::string serialize_answer(const ParsedAnswer& a) {
  json j = json::object();
  j["Analysis"] = a.analysis;
  j["Rule"] = a.rule;
  j["Test Image"] = a.test_image;
  j["Conclusion"] = label_name(a.conclusion);
  return j.dump();
}

}  // namespace cg
