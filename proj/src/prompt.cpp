#include "cg/prompt.hpp"

#include <charconv>

#include <nlohmann/json.hpp>

#include "cg/describe.hpp"

namespace cg {

namespace detail {
extern const std::pair<std::string_view, std::string_view> kPromptTemplates[];
extern const std::size_t kPromptTemplateCount;
}  // namespace detail

namespace {

constexpr std::string_view kTaskMarker = "**Your Task and Required Output:**";

std::vector<std::string_view> split_csv(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t parse_seed(std::string_view text, std::string_view spec) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(Errc::kInvalidCondition, "bad perturbation seed in '" + std::string(spec) + "'");
  }
  return v;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Condition Condition::parse(std::string_view spec) {
  const auto parts = split_csv(spec);
  Condition c;
  if (parts[0] == "ap") c.representation = Representation::kAP;
  else if (parts[0] == "ad") c.representation = Representation::kAD;
  else if (parts[0] == "image") c.representation = Representation::kImage;
  else throw Error(Errc::kInvalidCondition, "unknown representation in '" + std::string(spec) + "'");

  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string_view p = parts[i];
    if (p == "concept") {
      c.concept_conditioned = true;
    } else if (p == "minimal") {
      c.context = Context::kMinimal;
    } else if (p == "grounded") {
      c.grounding = Grounding::kQueryImage;
    } else if (p.starts_with("shuffle-cat:") || p.starts_with("shuffle-seq:")) {
      if (c.perturbation != Perturbation::kNone) {
        throw Error(Errc::kInvalidCondition, "at most one perturbation in '" + std::string(spec) + "'");
      }
      c.perturbation = p.starts_with("shuffle-cat:") ? Perturbation::kCategories : Perturbation::kQuerySequence;
      c.perturbation_seed = parse_seed(p.substr(12), spec);
    } else {
      throw Error(Errc::kInvalidCondition, "unknown flag '" + std::string(p) + "' in '" + std::string(spec) + "'");
    }
  }
  c.validate();
  return c;
}

std::string Condition::spec() const {
  std::string s = representation == Representation::kAP ? "ap" : representation == Representation::kAD ? "ad" : "image";
  if (concept_conditioned) s += ",concept";
  if (context == Context::kMinimal) s += ",minimal";
  if (grounding == Grounding::kQueryImage) s += ",grounded";
  if (perturbation == Perturbation::kCategories) s += ",shuffle-cat:" + std::to_string(perturbation_seed);
  if (perturbation == Perturbation::kQuerySequence) s += ",shuffle-seq:" + std::to_string(perturbation_seed);
  return s;
}

void Condition::validate() const {
  if (representation == Representation::kImage &&
      (concept_conditioned || context != Context::kFull || grounding != Grounding::kNone ||
       perturbation != Perturbation::kNone)) {
    throw Error(Errc::kInvalidCondition, "the image baseline takes no concept, minimal, grounded or shuffle flags");
  }
}

bool Condition::uses_images() const noexcept {
  return representation == Representation::kImage || grounding == Grounding::kQueryImage;
}

Dialect Condition::dialect() const noexcept {
  return representation == Representation::kImage ? Dialect::kCat : Dialect::kPosNeg;
}

std::string_view system_template(std::string_view name) {
  for (std::size_t i = 0; i < detail::kPromptTemplateCount; ++i) {
    if (detail::kPromptTemplates[i].first == name) return detail::kPromptTemplates[i].second;
  }
  throw Error(Errc::kInvalidCondition, "no prompt template named '" + std::string(name) + "'");
}

std::vector<std::string_view> system_template_names() {
  std::vector<std::string_view> names;
  for (std::size_t i = 0; i < detail::kPromptTemplateCount; ++i) names.push_back(detail::kPromptTemplates[i].first);
  return names;
}

std::string_view template_for(const Condition& c) {
  c.validate();
  if (c.representation == Representation::kImage) return "visual";
  if (c.grounding == Grounding::kQueryImage) {
    if (c.context == Context::kMinimal) return "grounded_base";
    return c.representation == Representation::kAP ? "grounded_ap" : "grounded_ad";
  }
  if (c.context == Context::kMinimal) return "minimal";
  return c.representation == Representation::kAP ? "cg_ap" : "cg_ad";
}

std::string build_system_prompt(const Condition& c, const std::optional<std::string>& concept_text) {
  std::string text(system_template(template_for(c)));
  if (!c.concept_conditioned) return text;
  if (!concept_text || concept_text->empty()) throw Error(Errc::kMissingConcept, "concept-conditioned prompt without a concept");
  const auto pos = text.find(kTaskMarker);
  if (pos == std::string::npos) throw Error(Errc::kInvalidCondition, "template lacks the task block");
  text.insert(pos, std::string(kConceptLinePrefix) + *concept_text + "\n\n");
  return text;
}

std::string render_program(const BongardImage& image) {
  std::string out = "[";
  const auto tokens = serialize_image(image);
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    if (s) out += ", ";
    out += "[";
    for (std::size_t a = 0; a < tokens[s].size(); ++a) {
      if (a) out += ", ";
      out += quote(tokens[s][a]);
    }
    out += "]";
  }
  return out + "]";
}

std::string build_user_prompt(const BongardProblem& p, const Condition& c) {
  c.validate();
  p.validate();
  int figure = 0;
  auto block = [&](const BongardImage& img) {
    ++figure;
    switch (c.representation) {
      case Representation::kAP: return render_program(img);
      case Representation::kAD: return render_description(img, figure).text();
      case Representation::kImage: return "[Image " + std::to_string(figure) + "]";
    }
    return std::string();
  };
  const std::string sep = c.representation == Representation::kAD ? "\n\n" : "\n";
  auto section = [&](const std::vector<BongardImage>& images) {
    std::string s;
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (i) s += sep;
      s += block(images[i]);
    }
    return s;
  };

  std::string out;
  out += "POSITIVE SET (6 descriptions):\n" + section(p.positives) + "\n\n";
  out += "NEGATIVE SET (6 descriptions):\n" + section(p.negatives) + "\n\n";
  out += "QUERY (1 description):\n" + block(p.query) + "\n\n";
  out += "Classify the query as 'positive' or 'negative'. Respond with JSON only.\n";
  return out;
}

std::vector<ImageAttachment> attach_images(const BongardProblem& p, const Condition& c) {
  c.validate();
  std::vector<ImageAttachment> out;
  auto add = [&](const std::filesystem::path& file, const std::string& what) {
    if (file.empty() || !std::filesystem::is_regular_file(file)) {
      throw Error(Errc::kImageFileMissing, p.id + ": " + what + (file.empty() ? " (no image root)" : " " + file.string()));
    }
    out.push_back(ImageAttachment{file});
  };
  if (c.representation == Representation::kImage) {
    if (p.positive_files.size() != kSupportPerClass || p.negative_files.size() != kSupportPerClass) {
      throw Error(Errc::kImageFileMissing, p.id + ": support images not available");
    }
    for (const auto& f : p.positive_files) add(f, "positive image");
    for (const auto& f : p.negative_files) add(f, "negative image");
    add(p.query_file, "query image");
  } else if (c.grounding == Grounding::kQueryImage) {
    add(p.query_file, "query image");
  }
  return out;
}

ParsedUserPrompt parse_user_prompt(std::string_view user) {
  static constexpr std::string_view kHeads[] = {"POSITIVE SET (6 descriptions):", "NEGATIVE SET (6 descriptions):",
                                                "QUERY (1 description):"};
  static constexpr std::string_view kTail = "Classify the query as 'positive' or 'negative'.";
  std::size_t bounds[4];
  for (int i = 0; i < 3; ++i) {
    bounds[i] = user.find(kHeads[i]);
    if (bounds[i] == std::string_view::npos || (i && bounds[i] < bounds[i - 1])) {
      throw TemplateMismatch(0, "missing section '" + std::string(kHeads[i]) + "'");
    }
  }
  bounds[3] = user.find(kTail);
  if (bounds[3] == std::string_view::npos || bounds[3] < bounds[2]) throw TemplateMismatch(0, "missing closing line");

  ParsedUserPrompt out;
  bool seen_ad = false;
  bool seen_ap = false;
  auto parse_section = [&](int i) {
    const std::size_t begin = bounds[i] + kHeads[i].size();
    const std::string_view body = user.substr(begin, bounds[i + 1] - begin);
    std::vector<BongardImage> images;
    std::string pending;  // AD block under construction
    std::size_t pos = 0;
    while (pos < body.size()) {
      std::size_t end = body.find('\n', pos);
      if (end == std::string_view::npos) end = body.size();
      std::string_view line = body.substr(pos, end - pos);
      pos = end + 1;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      if (!pending.empty()) {
        pending += "\n";
        pending += line;
        if (line == kDescriptionFooter) {
          images.push_back(parse_description(pending));
          pending.clear();
        }
      } else if (line.starts_with("To draw figure")) {
        seen_ad = true;
        pending = std::string(line);
      } else if (line.starts_with("[")) {
        seen_ap = true;
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_array()) throw TemplateMismatch(0, "unparsable action program line");
        TokenImage tokens;
        try {
          tokens = j.get<TokenImage>();
        } catch (const nlohmann::json::exception&) {
          throw TemplateMismatch(0, "action program must be a list of token lists");
        }
        images.push_back(parse_image(tokens));
      } else {
        throw TemplateMismatch(0, "unrecognized block line '" + std::string(line) + "'");
      }
    }
    if (!pending.empty()) throw TemplateMismatch(0, "unterminated action description");
    return images;
  };
  out.positives = parse_section(0);
  out.negatives = parse_section(1);
  auto query = parse_section(2);
  if (seen_ad == seen_ap) throw TemplateMismatch(0, "prompt must contain either programs or descriptions");
  if (out.positives.size() != kSupportPerClass || out.negatives.size() != kSupportPerClass || query.size() != 1) {
    throw TemplateMismatch(0, "expected 6 positive, 6 negative and 1 query block");
  }
  out.query = std::move(query.front());
  out.representation = seen_ad ? Representation::kAD : Representation::kAP;
  return out;
}

PromptBundle build_bundle(const BongardProblem& p, const Condition& c) {
  PromptBundle b;
  b.system = build_system_prompt(c, p.concept_text);
  b.user = build_user_prompt(p, c);
  b.images = attach_images(p, c);
  b.dialect = c.dialect();
  return b;
}

}  // namespace cg
