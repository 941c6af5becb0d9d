#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cg/dataset.hpp"

namespace cg {

enum class Representation { kAP, kAD, kImage };
enum class Context { kFull, kMinimal };
enum class Grounding { kNone, kQueryImage };
enum class Perturbation { kNone, kCategories, kQuerySequence };

// How the model is asked to answer: symbolic conditions use pos/neg, the
// visual baseline uses cat_2/cat_1.
enum class Dialect { kPosNeg, kCat };

// One experimental regime. Textual form (also the record fingerprint):
//   ap|ad|image[,concept][,minimal][,grounded][,shuffle-cat:SEED|shuffle-seq:SEED]
struct Condition {
  Representation representation = Representation::kAP;
  bool concept_conditioned = false;
  Context context = Context::kFull;
  Grounding grounding = Grounding::kNone;
  Perturbation perturbation = Perturbation::kNone;
  std::uint64_t perturbation_seed = 0;

  static Condition parse(std::string_view spec);  // InvalidCondition on bad input
  std::string spec() const;                       // canonical form
  void validate() const;                          // InvalidCondition
  bool uses_images() const noexcept;
  Dialect dialect() const noexcept;

  friend bool operator==(const Condition&, const Condition&) = default;
};

struct ImageAttachment {
  std::filesystem::path path;
  std::string mime_type = "image/png";
  friend bool operator==(const ImageAttachment&, const ImageAttachment&) = default;
};

struct PromptBundle {
  std::string system;
  std::string user;
  std::vector<ImageAttachment> images;
  Dialect dialect = Dialect::kPosNeg;
};

inline constexpr std::string_view kConceptLinePrefix = "Here is the overall concept behind the positive samples: ";

// Raw stored template by name: visual, cg_ap, cg_ad, minimal, grounded_base,
// grounded_ad, grounded_ap. Throws InvalidCondition for unknown names.
std::string_view system_template(std::string_view name);
std::vector<std::string_view> system_template_names();
// Template name selected for a condition.
std::string_view template_for(const Condition& c);

std::string build_system_prompt(const Condition& c, const std::optional<std::string>& concept_text);
std::string build_user_prompt(const BongardProblem& p, const Condition& c);
std::vector<ImageAttachment> attach_images(const BongardProblem& p, const Condition& c);

// Everything the model sees for an (already perturbed, if applicable) problem.
PromptBundle build_bundle(const BongardProblem& p, const Condition& c);

// Images recovered from a symbolic user prompt (AP or AD blocks).
struct ParsedUserPrompt {
  Representation representation = Representation::kAP;
  std::vector<BongardImage> positives;
  std::vector<BongardImage> negatives;
  BongardImage query;
};

// Inverse of build_user_prompt for AP and AD prompts; TemplateMismatch otherwise.
ParsedUserPrompt parse_user_prompt(std::string_view user);

// Action-program line for one image: [["tok", "tok"], ["tok"]].
std::string render_program(const BongardImage& image);

}  // namespace cg
