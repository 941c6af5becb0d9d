#include <doctest.h>

#include "cg/describe.hpp"
#include "cg/perturb.hpp"
#include "cg/prompt.hpp"
#include "support.hpp"

using namespace cg;
namespace fs = std::filesystem;

namespace {

constexpr const char* kA1 = "bd_right_triangle_band_0000";

BongardProblem fixture(const char* id = kA1) {
  const Corpus corpus = Corpus::load(cgtest::source_dir() / "data/fixtures/corpus");
  return select_query(corpus.at(id), QueryPolicy::kHeldOutPos, 0);
}

std::size_t count(const std::string& hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

std::string with_figure(std::string text, int figure) {
  return "To draw figure " + std::to_string(figure) + text.substr(text.find(','));
}

}  // namespace

TEST_CASE("condition specs parse and print canonically") {
  for (const char* spec : {"ap", "ad", "image", "ap,concept", "ad,concept", "ap,minimal", "ad,minimal", "ap,grounded",
                           "ad,grounded", "ap,minimal,grounded", "ap,shuffle-cat:7", "ap,shuffle-seq:12"}) {
    CAPTURE(spec);
    CHECK(Condition::parse(spec).spec() == spec);
  }
  CHECK(Condition::parse("ap,grounded,concept").spec() == "ap,concept,grounded");
  for (const char* bad : {"", "xy", "ap,foo", "image,concept", "image,grounded", "ap,shuffle-cat:", "ap,shuffle-cat:x",
                          "ap,shuffle-cat:1,shuffle-seq:2", "image,shuffle-cat:3"}) {
    CAPTURE(bad);
    try {
      Condition::parse(bad);
      FAIL("expected InvalidCondition");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::kInvalidCondition);
    }
  }
  CHECK(Condition::parse("image").dialect() == Dialect::kCat);
  CHECK(Condition::parse("ap,grounded").uses_images());
  CHECK_FALSE(Condition::parse("ad").uses_images());
}

TEST_CASE("system templates are byte-identical to the resource files") {
  const auto names = system_template_names();
  CHECK(names.size() == 7);
  for (auto name : names) {
    CAPTURE(name);
    const auto file = cgtest::source_dir() / "resources/prompts" / (std::string(name) + ".txt");
    CHECK(std::string(system_template(name)) == cgtest::slurp(file));
  }
  CHECK_THROWS_AS(system_template("nope"), Error);
  CHECK(template_for(Condition::parse("image")) == "visual");
  CHECK(template_for(Condition::parse("ad,minimal")) == "minimal");
  CHECK(template_for(Condition::parse("ad,minimal,grounded")) == "grounded_base");
  CHECK(template_for(Condition::parse("ad,grounded")) == "grounded_ad");
  CHECK(template_for(Condition::parse("ap,shuffle-cat:1")) == "cg_ap");
}

TEST_CASE("templates carry their key phrases") {
  CHECK(build_system_prompt(Condition::parse("ad"), std::nullopt).find("You will NOT be shown any images.") !=
        std::string::npos);
  const auto visual = build_system_prompt(Condition::parse("image"), std::nullopt);
  CHECK(visual.find("The first 6 images") != std::string::npos);
  CHECK(visual.find("{n}") == std::string::npos);
  CHECK(visual.find("{m}") == std::string::npos);
  const auto minimal = build_system_prompt(Condition::parse("ap,minimal"), std::nullopt);
  CHECK(minimal.find("action program") == std::string::npos);
  for (auto name : system_template_names()) {
    const std::string t(system_template(name));
    CHECK(count(t, "{") == count(t, "}"));
    CHECK(t.find('\r') == std::string::npos);
  }
}

TEST_CASE("concept line is inserted exactly once") {
  const std::string concept_text = "unbalanced trapezoid right_triangle AND uneven band four arcs";
  const std::string line = std::string(kConceptLinePrefix) + concept_text;
  for (const char* spec : {"ap,concept", "ad,concept", "ap,minimal,concept", "ap,grounded,concept"}) {
    CAPTURE(spec);
    const auto c = Condition::parse(spec);
    const auto text = build_system_prompt(c, concept_text);
    CHECK(count(text, line) == 1);
    CHECK(count(text, kConceptLinePrefix) == 1);
    CHECK(text.find(line) < text.find("**Your Task and Required Output:**"));
    std::string stripped = text;
    stripped.erase(stripped.find(line), line.size() + 2);
    CHECK(stripped == system_template(template_for(c)));
  }
  CHECK(build_system_prompt(Condition::parse("ap"), concept_text).find(kConceptLinePrefix) == std::string::npos);
  try {
    build_system_prompt(Condition::parse("ap,concept"), std::nullopt);
    FAIL("expected MissingConcept");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kMissingConcept);
  }
}

TEST_CASE("AD user prompt embeds the worked descriptions") {
  const auto p = fixture();
  const auto user = build_user_prompt(p, Condition::parse("ad"));
  const auto pos = cgtest::slurp(cgtest::source_dir() / "tests/golden/a1_positive_ad.txt");
  const auto neg = cgtest::slurp(cgtest::source_dir() / "tests/golden/a1_negative_ad.txt");
  CHECK(user.rfind("POSITIVE SET (6 descriptions):\n" + pos + "\n\n", 0) == 0);
  CHECK(user.find("NEGATIVE SET (6 descriptions):\n" + with_figure(neg, 7) + "\n\n") != std::string::npos);
  CHECK(count(user, "To draw figure ") == 13);
  CHECK(user.find("To draw figure 13, follow these steps:") > user.find("QUERY (1 description):"));
  CHECK(user.ends_with("Classify the query as 'positive' or 'negative'. Respond with JSON only.\n"));
}

TEST_CASE("AP user prompt lists 13 programs in order") {
  const auto p = fixture();
  const auto user = build_user_prompt(p, Condition::parse("ap"));
  std::vector<std::string> programs;
  std::istringstream in(user);
  for (std::string line; std::getline(in, line);) {
    if (line.starts_with("[")) programs.push_back(line);
  }
  REQUIRE(programs.size() == 13);
  for (int i = 0; i < 6; ++i) CHECK(programs[i] == render_program(p.positives[i]));
  for (int i = 0; i < 6; ++i) CHECK(programs[6 + i] == render_program(p.negatives[i]));
  CHECK(programs[12] == render_program(p.query));
  CHECK(render_program(parse_image({{"line_normal_0.300-0.500"}, {"arc_circle_0.100_0.750-0.250"}})) ==
        R"([["line_normal_0.300-0.500"], ["arc_circle_0.100_0.750-0.250"]])");
}

TEST_CASE("user prompts parse back to the same images") {
  for (const char* id : {kA1, "ff_nact5_0001", "hd_fan_0000"}) {
    const auto p = fixture(id);
    const auto ap = parse_user_prompt(build_user_prompt(p, Condition::parse("ap")));
    CHECK(ap.representation == Representation::kAP);
    CHECK(ap.positives == p.positives);
    CHECK(ap.negatives == p.negatives);
    CHECK(ap.query == p.query);
    const auto ad = parse_user_prompt(build_user_prompt(p, Condition::parse("ad")));
    CHECK(ad.representation == Representation::kAD);
    REQUIRE(ad.positives.size() == 6);
    CHECK(ad.query.action_count() == p.query.action_count());
  }
  CHECK_THROWS_AS(parse_user_prompt("hello"), TemplateMismatch);
}

TEST_CASE("perturbed conditions build from the perturbed problem") {
  const auto p = fixture();
  const auto c = Condition::parse("ap,shuffle-cat:5");
  const auto shuffled = shuffle_categories(p, perturbation_seed(5, p.id));
  CHECK(build_user_prompt(shuffled, c) == build_user_prompt(shuffled, Condition::parse("ap")));
  CHECK(shuffled.gold == p.gold);
  CHECK(build_bundle(shuffled, c).user == build_user_prompt(shuffled, c));
}

TEST_CASE("image attachments") {
  const auto p = fixture();
  CHECK(attach_images(p, Condition::parse("ap")).empty());
  const auto grounded = attach_images(p, Condition::parse("ap,grounded"));
  REQUIRE(grounded.size() == 1);
  CHECK(grounded[0].path == p.query_file);
  CHECK(grounded[0].mime_type == "image/png");
  const auto visual = attach_images(p, Condition::parse("image"));
  REQUIRE(visual.size() == 13);
  CHECK(visual[0].path == p.positive_files[0]);
  CHECK(visual[6].path == p.negative_files[0]);
  CHECK(visual[12].path == p.query_file);

  const auto bundle = build_bundle(p, Condition::parse("image"));
  CHECK(bundle.dialect == Dialect::kCat);
  CHECK(bundle.images.size() == 13);
  CHECK(build_bundle(p, Condition::parse("ad")).images.empty());

  auto broken = p;
  broken.query_file = cgtest::scratch("missing-png") / "absent.png";
  try {
    attach_images(broken, Condition::parse("ap,grounded"));
    FAIL("expected ImageFileMissing");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kImageFileMissing);
  }
  broken.query_file.clear();
  CHECK_THROWS_AS(attach_images(broken, Condition::parse("ad,grounded")), Error);
}
