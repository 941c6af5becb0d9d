#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <regex>

#include "cg/grammar.hpp"
#include "support.hpp"

using namespace cg;

namespace {

std::vector<std::string> a1_tokens(const char* which) {
  const auto j = nlohmann::json::parse(cgtest::slurp(cgtest::source_dir() / "tests/golden/a1_programs.json"));
  return j.at(which).get<std::vector<std::string>>();
}

std::vector<std::string> golden_lines(const char* file) {
  std::vector<std::string> out;
  std::istringstream in(cgtest::slurp(cgtest::source_dir() / "tests/golden" / file));
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("parse_action reads lines and arcs") {
  const auto line = std::get<LineAction>(parse_action("line_normal_0.300-0.500"));
  CHECK(line.style.token() == "normal");
  CHECK(line.length.thousandths() == 300);
  CHECK(line.turn.thousandths() == 500);

  const auto arc = std::get<ArcAction>(parse_action("arc_zigzag_0.500_0.625-0.500"));
  CHECK(arc.style.token() == "zigzag");
  CHECK(arc.radius.thousandths() == 500);
  CHECK(arc.sweep.thousandths() == 625);
  CHECK(arc.turn.thousandths() == 500);
}

TEST_CASE("malformed tokens are rejected with an offset") {
  for (const char* bad : {"line_normal_1.5-0.5", "line_normal_1.500-0.500", "line_normal_0.30-0.500",
                          "circle_normal_0.300-0.500", "line_normal_0.300", "arc_normal_0.300-0.500",
                          "line_normal_0.300-0.500-0.1", "line__0.300-0.500", "line_Normal_0.300-0.500",
                          "line_normal_-0.300-0.500", "", "line_normal_0.3e1-0.500"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_action(bad), MalformedToken);
  }
  try {
    parse_action("line_normal_1.5-0.5");
    FAIL("expected MalformedToken");
  } catch (const MalformedToken& e) {
    CHECK(e.code() == Errc::kMalformedToken);
    CHECK(e.offset() <= std::string("line_normal_1.5-0.5").size());
    CHECK(e.offset() >= 12);
  }
}

TEST_CASE("serialize_action formats three fraction digits") {
  CHECK(serialize_action(LineAction{ActionStyle("square"), UnitValue::from_thousandths(200),
                                    UnitValue::from_thousandths(500)}) == "line_square_0.200-0.500");
  CHECK(serialize_action(LineAction{ActionStyle("normal"), UnitValue::from_double(1.0),
                                    UnitValue::from_double(0.5)}) == "line_normal_1.000-0.500");
}

TEST_CASE("all worked-example tokens round-trip byte for byte") {
  std::size_t n = 0;
  for (const char* which : {"negative", "positive"}) {
    for (const auto& t : a1_tokens(which)) {
      CHECK(serialize_action(parse_action(t)) == t);
      ++n;
    }
  }
  CHECK(n == 28);
}

TEST_CASE("fuzzed tokens and images round-trip") {
  std::mt19937_64 g(12345);
  for (int i = 0; i < 10000; ++i) {
    const auto t = cgtest::random_token(g);
    REQUIRE(serialize_action(parse_action(t)) == t);
  }
  for (int i = 0; i < 500; ++i) {
    const auto img = cgtest::random_token_image(g);
    REQUIRE(serialize_image(parse_image(img)) == img);
  }
}

TEST_CASE("turn and sweep conversions") {
  auto turn = [](int m) { return turn_to_degrees(UnitValue::from_thousandths(m)); };
  auto sweep = [](int m) { return sweep_to_degrees(UnitValue::from_thousandths(m)); };
  CHECK(turn(875).degrees == doctest::Approx(135.0));
  CHECK(turn(875).magnitude_text() == "135.0");
  CHECK(turn(500).degrees == 0.0);
  CHECK(turn(167).degrees == doctest::Approx(-119.88));
  CHECK(turn(167).magnitude_text() == "119.9");
  CHECK(turn(86).degrees == doctest::Approx(-149.04));
  CHECK(turn(86).magnitude_text() == "149.0");
  CHECK(sweep(625).degrees == doctest::Approx(90.0));
  CHECK(sweep(500).degrees == 0.0);
  CHECK(sweep(750).degrees == doctest::Approx(180.0));
  CHECK(turn(0).degrees == doctest::Approx(-180.0));
  CHECK(sweep(1000).degrees == doctest::Approx(360.0));

  CHECK_THROWS_AS(turn_to_degrees(1.2), Error);
  CHECK_THROWS_AS(sweep_to_degrees(-0.1), Error);
  try {
    turn_to_degrees(1.0001);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kOutOfRange);
  }
}

TEST_CASE("turn conversion is antisymmetric around the midpoint") {
  for (int d = 0; d <= 500; ++d) {
    const auto up = turn_to_degrees(UnitValue::from_thousandths(500 + d));
    const auto down = turn_to_degrees(UnitValue::from_thousandths(500 - d));
    REQUIRE(up.degrees == doctest::Approx(-down.degrees));
    REQUIRE(up.tenths == -down.tenths);
  }
}

TEST_CASE("tenths inverse recovers every thousandth") {
  for (int m = 0; m <= 1000; ++m) {
    const auto u = UnitValue::from_thousandths(m);
    REQUIRE(turn_from_tenths(turn_tenths(u)).thousandths() == m);
    REQUIRE(turn_tenths(u) == turn_to_degrees(u).tenths);
    REQUIRE(sweep_tenths(u) == sweep_to_degrees(u).tenths);
  }
  CHECK(sweep_from_tenths(900).thousandths() == 625);
  CHECK(turn_from_tenths(1350).thousandths() == 875);
}

// Independent scan of the worked pairs: read the raw token text and the printed
// degrees, and check which scale factors are consistent with every pair.
TEST_CASE("consistency scan fixes the sweep and turn scales") {
  const std::regex arc_re(R"(sweeping ([0-9.]+) degrees)");
  const std::regex turn_re(R"(turn (left|right) by ([0-9.]+) degrees)");
  std::size_t arcs = 0, turns = 0;
  bool sweep360_ok = true, sweep720_ok = true;
  for (auto [which, file] : {std::pair{"negative", "a1_negative_ad.txt"}, std::pair{"positive", "a1_positive_ad.txt"}}) {
    const auto toks = a1_tokens(which);
    const auto lines = golden_lines(file);
    REQUIRE(lines.size() == toks.size() + 2);
    for (std::size_t k = 0; k < toks.size(); ++k) {
      const std::string& tok = toks[k];
      const std::string& line = lines[k + 1];
      const auto dash = tok.rfind('-');
      const double turn_field = std::stod(tok.substr(dash + 1));
      std::smatch m;
      if (tok.rfind("arc_", 0) == 0) {
        const auto head = tok.substr(0, dash);
        const double sweep_field = std::stod(head.substr(head.rfind('_') + 1));
        REQUIRE(std::regex_search(line, m, arc_re));
        const double printed = std::stod(m[1]);
        sweep360_ok &= std::abs(std::abs((sweep_field - 0.5) * 360) - printed) <= 0.05 + 1e-9;
        sweep720_ok &= std::abs(std::abs((sweep_field - 0.5) * 720) - printed) <= 0.05 + 1e-9;
        ++arcs;
      }
      if (std::regex_search(line, m, turn_re)) {
        const double signed_printed = (m[1] == "left" ? 1 : -1) * std::stod(m[2]);
        CHECK(std::abs((turn_field - 0.5) * 360 - signed_printed) <= 0.05 + 1e-9);
        ++turns;
      } else {
        CHECK(line.find("continue straight without turning") != std::string::npos);
        CHECK(turn_field == 0.5);
      }
    }
  }
  CHECK(arcs == 8);
  CHECK(turns == 10);
  CHECK(sweep720_ok);
  CHECK_FALSE(sweep360_ok);
}

TEST_CASE("images keep shape boundaries") {
  const auto img = parse_image({a1_tokens("negative")});
  CHECK(img.shapes.size() == 1);
  CHECK(img.action_count() == 14);

  const TokenImage two = {{"line_normal_0.300-0.500"}, {"arc_circle_0.100_0.750-0.250", "line_zigzag_0.200-0.500"}};
  const auto parsed = parse_image(two);
  CHECK(parsed.shapes.size() == 2);
  CHECK(parsed.shapes[1].actions.size() == 2);
  CHECK(serialize_image(parsed) == two);
}

TEST_CASE("image errors") {
  try {
    parse_image({{}});
    FAIL("expected EmptyShape");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kEmptyShape);
  }
  CHECK_THROWS_AS(parse_image({}), Error);
  try {
    parse_image({{"line_normal_0.300-0.500"}, {"line_normal_0.300-0.500", "nope"}});
    FAIL("expected MalformedToken");
  } catch (const MalformedToken& e) {
    CHECK(e.shape_index() == 1);
    CHECK(e.action_index() == 1);
  }
}

TEST_CASE("unknown styles are carried and flagged") {
  const auto img = parse_image({{"line_wavy_0.300-0.500", "line_normal_0.300-0.500"}});
  CHECK(serialize_image(img)[0][0] == "line_wavy_0.300-0.500");
  CHECK(validate_image(img).size() == 1);
  CHECK(validate_image(parse_image({a1_tokens("positive")})).empty());
  CHECK(is_valid_style_token("right_angle"));
  CHECK_FALSE(is_valid_style_token("Zig"));
}
