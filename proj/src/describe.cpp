#include "cg/describe.hpp"

#include <regex>

namespace cg {
namespace {

std::string turn_clause(UnitValue turn) {
  const DegreeValue deg = turn_to_degrees(turn);
  if (deg.tenths == 0) return " Then, continue straight without turning.";
  return std::string(" After that, turn ") + (deg.tenths > 0 ? "left" : "right") + " by " + deg.magnitude_text() +
         " degrees.";
}

std::string step_line(std::size_t k, const BasicAction& action) {
  struct Visitor {
    std::size_t k;
    std::string operator()(const LineAction& a) const {
      return "Step " + std::to_string(k) + ": draw a " + a.style.token() + " line of " + a.length.to_string() +
             " units." + turn_clause(a.turn);
    }
    std::string operator()(const ArcAction& a) const {
      return "Step " + std::to_string(k) + ": draw a " + a.style.token() + " arc with a radius of " +
             a.radius.to_string() + " and sweeping " + sweep_to_degrees(a.sweep).magnitude_text() + " degrees." +
             turn_clause(a.turn);
    }
  };
  return std::visit(Visitor{k}, action);
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  if (lines.size() > 1 && lines.back().empty()) lines.pop_back();
  return lines;
}

std::int64_t parse_tenths(const std::string& s) {
  const auto dot = s.find('.');
  return std::stoll(s.substr(0, dot)) * 10 + (s[dot + 1] - '0');
}

UnitValue parse_thousandths(const std::string& s) {
  return UnitValue::from_thousandths((s[0] - '0') * 1000 + std::stoi(s.substr(2)));
}

}  // namespace

std::string ActionDescription::text() const {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string description_header(int figure_index) {
  return "To draw figure " + std::to_string(figure_index) + ", follow these steps:";
}

ActionDescription render_description(const BongardImage& image, int figure_index) {
  ActionDescription d;
  d.figure_index = figure_index;
  d.lines.reserve(image.action_count() + 2);
  d.lines.push_back(description_header(figure_index));
  std::size_t k = 0;
  for (const auto& shape : image.shapes) {
    for (const auto& action : shape.actions) d.lines.push_back(step_line(++k, action));
  }
  d.lines.emplace_back(kDescriptionFooter);
  return d;
}

BongardImage parse_description(std::string_view text) {
  static const std::regex kHeader(R"(^To draw figure (\d+), follow these steps:$)");
  static const std::regex kLine(
      R"(^Step (\d+): draw a ([a-z_]+) line of (\d\.\d{3}) units\.(?: Then, continue straight without turning\.| After that, turn (left|right) by (\d+\.\d) degrees\.)$)");
  static const std::regex kArc(
      R"(^Step (\d+): draw a ([a-z_]+) arc with a radius of (\d\.\d{3}) and sweeping (\d+\.\d) degrees\.(?: Then, continue straight without turning\.| After that, turn (left|right) by (\d+\.\d) degrees\.)$)");

  const auto lines = split_lines(text);
  if (lines.empty() || !std::regex_match(lines[0], kHeader)) throw TemplateMismatch(1, "expected figure header");
  if (lines.size() < 3) throw TemplateMismatch(lines.size() + 1, "expected at least one step and the footer");
  if (lines.back() != kDescriptionFooter) throw TemplateMismatch(lines.size(), "expected footer");

  auto turn_from = [](const std::ssub_match& dir, const std::ssub_match& mag, std::size_t line_no) {
    if (!dir.matched) return UnitValue::from_thousandths(500);
    const std::int64_t t = parse_tenths(mag.str());
    if (t == 0) throw TemplateMismatch(line_no, "zero turn must be written as 'continue straight'");
    try {
      return turn_from_tenths(dir.str() == "left" ? t : -t);
    } catch (const Error&) {
      throw TemplateMismatch(line_no, "turn out of range");
    }
  };

  OneStrokeShape shape;
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    std::smatch m;
    try {
      if (std::regex_match(lines[i], m, kLine)) {
        if (std::stoul(m[1].str()) != i) throw TemplateMismatch(line_no, "step number out of sequence");
        shape.actions.push_back(
            LineAction{ActionStyle(m[2].str()), parse_thousandths(m[3].str()), turn_from(m[4], m[5], line_no)});
      } else if (std::regex_match(lines[i], m, kArc)) {
        if (std::stoul(m[1].str()) != i) throw TemplateMismatch(line_no, "step number out of sequence");
        UnitValue sweep;
        try {
          sweep = sweep_from_tenths(parse_tenths(m[4].str()));
        } catch (const Error&) {
          throw TemplateMismatch(line_no, "sweep out of range");
        }
        shape.actions.push_back(ArcAction{ActionStyle(m[2].str()), parse_thousandths(m[3].str()), sweep,
                                          turn_from(m[5], m[6], line_no)});
      } else {
        throw TemplateMismatch(line_no, "not a step line");
      }
    } catch (const TemplateMismatch&) {
      throw;
    } catch (const Error& e) {
      throw TemplateMismatch(line_no, e.what());
    }
  }
  BongardImage image;
  image.shapes.push_back(std::move(shape));
  return image;
}

}  // namespace cg
