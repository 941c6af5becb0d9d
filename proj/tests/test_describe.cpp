#include <doctest.h>

#include <nlohmann/json.hpp>

#include "cg/describe.hpp"
#include "support.hpp"

using namespace cg;

namespace {

BongardImage a1(const char* which) {
  const auto j = nlohmann::json::parse(cgtest::slurp(cgtest::source_dir() / "tests/golden/a1_programs.json"));
  return parse_image({j.at(which).get<TokenShape>()});
}

}  // namespace

TEST_CASE("worked examples render byte-exact") {
  const auto neg = render_description(a1("negative"), 1).text();
  const auto pos = render_description(a1("positive"), 1).text();
  CHECK(neg == cgtest::slurp(cgtest::source_dir() / "tests/golden/a1_negative_ad.txt"));
  CHECK(pos == cgtest::slurp(cgtest::source_dir() / "tests/golden/a1_positive_ad.txt"));
  CHECK(neg.find("Step 8: draw a zigzag arc with a radius of 0.500 and sweeping 90.0 degrees.") != std::string::npos);
  CHECK(pos.find("Step 7: draw a square line of 0.200 units.") != std::string::npos);
}

TEST_CASE("single action description") {
  const auto d = render_description(parse_image({{"line_normal_0.500-0.500"}}), 3);
  REQUIRE(d.lines.size() == 3);
  CHECK(d.lines[0] == "To draw figure 3, follow these steps:");
  CHECK(d.lines[1] == "Step 1: draw a normal line of 0.500 units. Then, continue straight without turning.");
  CHECK(d.lines[2] == "The figure is now complete.");
  CHECK(d.text().back() == '.');
}

TEST_CASE("steps are numbered across shapes") {
  const auto d = render_description(parse_image({{"line_normal_0.500-0.250"}, {"arc_circle_0.200_0.250-0.500"}}));
  REQUIRE(d.lines.size() == 4);
  CHECK(d.lines[1] == "Step 1: draw a normal line of 0.500 units. After that, turn right by 90.0 degrees.");
  CHECK(d.lines[2] ==
        "Step 2: draw a circle arc with a radius of 0.200 and sweeping 180.0 degrees. Then, continue straight without "
        "turning.");
}

TEST_CASE("parse_description inverts the renderer") {
  for (const char* which : {"negative", "positive"}) {
    const auto img = a1(which);
    const auto back = parse_description(render_description(img).text());
    CHECK(serialize_image(back) == serialize_image(img));
  }
  const auto img = parse_description(
      "To draw figure 1, follow these steps:\r\n"
      "Step 1: draw a normal line of 0.283 units. After that, turn left by 135.0 degrees.\r\n"
      "The figure is now complete.\n");
  CHECK(turn_of(img.shapes[0].actions[0]).thousandths() == 875);
}

TEST_CASE("fuzzed images round-trip through descriptions") {
  std::mt19937_64 g(99);
  for (int i = 0; i < 2000; ++i) {
    auto tokens = cgtest::random_token_image(g);
    // Sweeps below the midpoint lose their sign in text; the inverse yields the
    // counterclockwise mirror.
    TokenShape flat;
    for (auto& shape : tokens) flat.insert(flat.end(), shape.begin(), shape.end());
    const auto img = parse_image({flat});
    const auto back = parse_description(render_description(img).text());
    REQUIRE(back.action_count() == img.action_count());
    for (std::size_t k = 0; k < flat.size(); ++k) {
      const auto& a = img.shapes[0].actions[k];
      const auto& b = back.shapes[0].actions[k];
      REQUIRE(style_of(a) == style_of(b));
      REQUIRE(turn_of(a) == turn_of(b));
      if (const auto* arc = std::get_if<ArcAction>(&a)) {
        const auto& barc = std::get<ArcAction>(b);
        REQUIRE(barc.radius == arc->radius);
        REQUIRE(barc.sweep.thousandths() == std::max(arc->sweep.thousandths(), 1000 - arc->sweep.thousandths()));
      } else {
        REQUIRE(std::get<LineAction>(b).length == std::get<LineAction>(a).length);
      }
    }
  }
}

TEST_CASE("template mismatches carry a line number") {
  try {
    parse_description("To draw figure 1, follow these steps:");
    FAIL("expected TemplateMismatch");
  } catch (const TemplateMismatch& e) {
    CHECK(e.code() == Errc::kTemplateMismatch);
  }
  try {
    parse_description(
        "To draw figure 1, follow these steps:\n"
        "Step 1: draw a normal line of 0.500 units. Then, continue straight without turning.\n"
        "Step 3: draw a normal line of 0.500 units. Then, continue straight without turning.\n"
        "The figure is now complete.");
    FAIL("expected TemplateMismatch");
  } catch (const TemplateMismatch& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_description("To draw figure 1, follow these steps:\n"
                                    "Step 1: draw a normal line of 0.5 units. Then, continue straight without turning.\n"
                                    "The figure is now complete."),
                  TemplateMismatch);
}
