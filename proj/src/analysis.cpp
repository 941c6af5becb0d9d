#include "cg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <array>
#include <map>
#include <set>
#include <tuple>

#include "json_io.hpp"

namespace cg {
namespace {

namespace fs = std::filesystem;

std::string join_keys(const std::vector<std::string>& keys) {
  std::string s;
  for (const auto& k : keys) s += k + '\x1f';
  return s;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string mean_std_cell(const std::vector<double>& values) {
  if (values.empty()) return "-";
  if (values.size() == 1) return format_fixed(values.front()) + " (n=1)";
  const MeanStd ms = grouped_mean_std(values);
  return format_fixed(ms.mean) + " ± " + format_fixed(ms.std);
}

const std::vector<std::string>& table1_order() {
  static const std::vector<std::string> order = {"AP",          "AD",          "AP+C",
                                                 "Base",        "Visual",      "Grounded AP",
                                                 "Grounded AD", "Categories Shuffle", "Test Sequence Shuffle"};
  return order;
}

TextTable table1(const ScoreSheet& sheet) {
  TextTable t{"table1", "Mean accuracy (%) across models", {"Condition", "Models", "FF", "BD", "HD", "Failures (%)"}};
  std::vector<std::string> conds;
  for (const auto& c : table1_order()) {
    if (!sheet.models(c).empty()) conds.push_back(c);
  }
  for (const auto& c : sheet.conditions()) {
    if (std::find(conds.begin(), conds.end(), c) == conds.end()) conds.push_back(c);
  }
  for (const auto& c : conds) {
    std::vector<std::string> row{c, std::to_string(sheet.models(c).size())};
    for (Category cat : {Category::kFF, Category::kBD, Category::kHD}) {
      try {
        row.push_back(format_fixed(pooled_accuracy(sheet, c, cat)));
      } catch (const Error&) {
        row.push_back("-");
      }
    }
    std::size_t n = 0, failures = 0;
    for (const auto& m : sheet.models(c)) {
      for (Split s : kAllSplits) {
        if (auto e = sheet.get(m, c, s)) {
          n += e->n;
          failures += e->failures;
        }
      }
    }
    row.push_back(n ? format_fixed(100.0 * static_cast<double>(failures) / static_cast<double>(n)) : "n/a");
    t.rows.push_back(std::move(row));
  }
  t.notes.push_back("HD is the mean of HD_COMB and HD_NOVEL. Failures are unparsable or failed answers, scored incorrect.");
  if (t.rows.empty()) t.notes.push_back("No conditions available.");
  return t;
}

TextTable fig2(const ScoreSheet& sheet) {
  TextTable t{"fig2", "Per-model accuracy change (percentage points)", {"Category", "Comparison", "Model", "Delta"}};
  static const std::tuple<const char*, const char*, const char*> kComparisons[] = {
      {"AD-Base", "AD", "Base"}, {"AP-Base", "AP", "Base"}, {"AP+C-AP", "AP+C", "AP"}};
  for (Category cat : kAllCategories) {
    for (const auto& [name, a, b] : kComparisons) {
      try {
        const DeltaSeries d = condition_delta(sheet, a, b, cat, name);
        for (const auto& [model, v] : d.per_model) {
          t.rows.push_back({std::string(category_name(cat)), name, model, format_signed(v)});
        }
        t.rows.push_back({std::string(category_name(cat)), name, "mean", format_signed(d.mean)});
      } catch (const Error& e) {
        t.notes.push_back(std::string(category_name(cat)) + " " + name + " unavailable: " + e.what());
      }
    }
  }
  return t;
}

TextTable summary_table(const ScoreSheet& sheet, std::string name, std::string title,
                        const std::vector<std::string>& conditions, const std::vector<Category>& cats) {
  TextTable t{std::move(name), std::move(title), {"Condition", "Models"}};
  for (Category c : cats) t.header.emplace_back(category_name(c));
  for (const auto& cond : conditions) {
    if (sheet.models(cond).empty()) continue;
    std::vector<std::string> row{cond, std::to_string(sheet.models(cond).size())};
    for (Category c : cats) row.push_back(mean_std_cell(model_values(sheet, cond, c)));
    t.rows.push_back(std::move(row));
  }
  t.notes.push_back("Mean ± sample standard deviation over models.");
  if (t.rows.empty()) t.notes.push_back("No matching conditions available.");
  return t;
}

TextTable asymmetry(const std::vector<EvalRecord>& records) {
  TextTable t{"asymmetry",
              "Accuracy by gold class",
              {"Condition", "Split", "N pos", "N neg", "Acc pos", "Acc neg", "Pred pos", "Pred neg", "Pred none",
               "Chi-square"}};
  std::map<std::pair<std::string, Split>, std::vector<EvalRecord>> groups;
  for (const auto& r : records) groups[{condition_label(r.condition), r.split}].push_back(r);
  for (const auto& [key, recs] : groups) {
    try {
      const ClassAsymmetry a = class_asymmetry(recs);
      t.rows.push_back({key.first, std::string(split_name(key.second)), std::to_string(a.n_pos),
                        std::to_string(a.n_neg), format_fixed(a.acc_pos), format_fixed(a.acc_neg),
                        std::to_string(a.predicted_pos), std::to_string(a.predicted_neg),
                        std::to_string(a.predicted_none), a.chi_square ? format_fixed(*a.chi_square) : "n/a"});
    } catch (const Error& e) {
      t.notes.push_back(key.first + " " + std::string(split_name(key.second)) + ": " + e.what());
    }
  }
  if (records.empty()) t.notes.push_back("Needs record logs; none given.");
  return t;
}

TextTable failures(const std::vector<EvalRecord>& records) {
  TextTable t{"failures",
              "Unparsable and failed answers",
              {"Model", "Condition", "Records", "Parse failures", "Transport failures", "Failure rate (%)"}};
  std::map<std::pair<std::string, std::string>, std::array<std::size_t, 3>> counts;
  for (const auto& r : records) {
    auto& c = counts[{r.model, condition_label(r.condition)}];
    ++c[0];
    c[1] += r.status == RecordStatus::kParseFailure;
    c[2] += r.status == RecordStatus::kTransportFailure;
  }
  for (const auto& [key, c] : counts) {
    t.rows.push_back({key.first, key.second, std::to_string(c[0]), std::to_string(c[1]), std::to_string(c[2]),
                      format_fixed(100.0 * static_cast<double>(c[1] + c[2]) / static_cast<double>(c[0]))});
  }
  if (records.empty()) t.notes.push_back("Needs record logs; none given.");
  return t;
}

}  // namespace

std::string condition_label(const Condition& c) {
  const bool ap = c.representation == Representation::kAP;
  const bool plain = !c.concept_conditioned && c.context == Context::kFull && c.grounding == Grounding::kNone &&
                     c.perturbation == Perturbation::kNone;
  if (c.representation == Representation::kImage) return "Visual";
  if (plain) return ap ? "AP" : "AD";
  if (c.perturbation == Perturbation::kNone && c.grounding == Grounding::kNone && c.context == Context::kFull) {
    return ap ? "AP+C" : "AD+C";
  }
  if (c.perturbation == Perturbation::kNone && c.grounding == Grounding::kNone && !c.concept_conditioned) {
    return ap ? "Base" : "Base (AD)";
  }
  if (c.perturbation == Perturbation::kNone && c.grounding == Grounding::kQueryImage && !c.concept_conditioned) {
    if (c.context == Context::kMinimal) return "Grounded Base";
    return ap ? "Grounded AP" : "Grounded AD";
  }
  if (ap && c.grounding == Grounding::kNone && !c.concept_conditioned && c.context == Context::kFull) {
    return c.perturbation == Perturbation::kCategories ? "Categories Shuffle" : "Test Sequence Shuffle";
  }
  return c.spec();
}

std::string condition_label(std::string_view spec) {
  try {
    return condition_label(Condition::parse(spec));
  } catch (const Error&) {
    return std::string(spec);
  }
}

std::string_view category_name(Category c) {
  switch (c) {
    case Category::kFF: return "FF";
    case Category::kBD: return "BD";
    case Category::kHD: return "HD";
  }
  return "?";
}

ResultTable accuracy_table(const std::vector<EvalRecord>& records, const std::vector<GroupKey>& group_by,
                           bool merge_hd) {
  if (records.empty()) throw Error(Errc::kEmptyGroup, "no records to aggregate");
  std::map<std::vector<std::string>, ResultRow> groups;
  for (const auto& r : records) {
    std::vector<std::string> keys;
    for (GroupKey k : group_by) {
      switch (k) {
        case GroupKey::kModel: keys.push_back(r.model); break;
        case GroupKey::kCondition: keys.push_back(r.condition); break;
        case GroupKey::kSplit: keys.emplace_back(split_name(r.split)); break;
        case GroupKey::kClass: keys.emplace_back(label_name(r.gold)); break;
      }
    }
    auto& row = groups[keys];
    row.keys = keys;
    ++row.n;
    row.correct += r.correct;
    row.parse_failures += r.status != RecordStatus::kOk;
  }
  ResultTable t;
  t.group_by = group_by;
  for (auto& [keys, row] : groups) {
    row.accuracy = 100.0 * static_cast<double>(row.correct) / static_cast<double>(row.n);
    t.rows.push_back(row);
  }
  const auto split_pos = std::find(group_by.begin(), group_by.end(), GroupKey::kSplit);
  if (merge_hd && split_pos != group_by.end()) {
    const auto idx = static_cast<std::size_t>(split_pos - group_by.begin());
    std::map<std::string, std::pair<const ResultRow*, const ResultRow*>> halves;
    for (const auto& row : t.rows) {
      auto rest = row.keys;
      rest[idx] = "HD";
      if (row.keys[idx] == "HD_COMB") halves[join_keys(rest)].first = &row;
      if (row.keys[idx] == "HD_NOVEL") halves[join_keys(rest)].second = &row;
    }
    std::vector<ResultRow> extra;
    for (const auto& [k, h] : halves) {
      if (!h.first || !h.second) continue;
      ResultRow row;
      row.keys = h.first->keys;
      row.keys[idx] = "HD";
      row.n = h.first->n + h.second->n;
      row.correct = h.first->correct + h.second->correct;
      row.parse_failures = h.first->parse_failures + h.second->parse_failures;
      row.accuracy = (h.first->accuracy + h.second->accuracy) / 2.0;
      extra.push_back(std::move(row));
    }
    t.rows.insert(t.rows.end(), extra.begin(), extra.end());
    std::sort(t.rows.begin(), t.rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.keys < b.keys; });
  }
  return t;
}

void ScoreSheet::set(const std::string& model, const std::string& condition, Split split, Entry entry) {
  if (std::find(condition_order_.begin(), condition_order_.end(), condition) == condition_order_.end()) {
    condition_order_.push_back(condition);
  }
  auto& models = model_order_[condition];
  if (std::find(models.begin(), models.end(), model) == models.end()) models.push_back(model);
  entries_[Key{model, condition, split}] = entry;
}

std::optional<ScoreSheet::Entry> ScoreSheet::get(std::string_view model, std::string_view condition,
                                                 Split split) const {
  const auto it = entries_.find(Key{std::string(model), std::string(condition), split});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> ScoreSheet::category(std::string_view model, std::string_view condition, Category c) const {
  switch (c) {
    case Category::kFF:
      if (auto e = get(model, condition, Split::kFF)) return e->accuracy;
      return std::nullopt;
    case Category::kBD:
      if (auto e = get(model, condition, Split::kBD)) return e->accuracy;
      return std::nullopt;
    case Category::kHD: {
      const auto comb = get(model, condition, Split::kHDComb);
      const auto novel = get(model, condition, Split::kHDNovel);
      if (!comb || !novel) return std::nullopt;
      return (comb->accuracy + novel->accuracy) / 2.0;
    }
  }
  return std::nullopt;
}

std::vector<std::string> ScoreSheet::conditions() const { return condition_order_; }

std::vector<std::string> ScoreSheet::models(std::string_view condition) const {
  const auto it = model_order_.find(condition);
  return it == model_order_.end() ? std::vector<std::string>{} : it->second;
}

ScoreSheet ScoreSheet::parse_csv(std::string_view text) {
  ScoreSheet sheet;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_csv_line(line);
    if (header.empty()) {
      header = fields;
      if (header.size() < 4 || header[0] != "model" || header[1] != "condition" || header[2] != "split" ||
          header[3] != "accuracy") {
        throw Error(Errc::kSchemaMismatch, "score CSV header must start with model,condition,split,accuracy");
      }
      continue;
    }
    const std::string where = "score CSV line " + std::to_string(line_no);
    if (fields.size() != header.size()) throw Error(Errc::kSchemaMismatch, where + ": wrong field count");
    const auto split = parse_split(fields[2]);
    if (!split) throw Error(Errc::kSchemaMismatch, where + ": unknown split '" + fields[2] + "'");
    Entry e;
    try {
      std::size_t used = 0;
      e.accuracy = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("trailing");
      for (std::size_t i = 4; i < header.size(); ++i) {
        if (header[i] == "n") e.n = std::stoul(fields[i]);
        else if (header[i] == "failures") e.failures = std::stoul(fields[i]);
      }
    } catch (const std::exception&) {
      throw Error(Errc::kSchemaMismatch, where + ": bad number");
    }
    if (e.accuracy < 0.0 || e.accuracy > 100.0) throw Error(Errc::kSchemaMismatch, where + ": accuracy out of range");
    sheet.set(fields[0], fields[1], *split, e);
  }
  if (header.empty()) throw Error(Errc::kSchemaMismatch, "score CSV is empty");
  return sheet;
}

ScoreSheet ScoreSheet::load_csv(const fs::path& file) {
  try {
    return parse_csv(detail::read_text(file));
  } catch (const Error& e) {
    if (e.code() == Errc::kSchemaMismatch) throw Error(Errc::kSchemaMismatch, file.string() + ": " + e.what());
    throw;
  }
}

std::string ScoreSheet::to_csv() const {
  std::string out = "model,condition,split,accuracy,n,failures\n";
  for (const auto& cond : condition_order_) {
    for (const auto& model : models(cond)) {
      for (Split s : kAllSplits) {
        const auto e = get(model, cond, s);
        if (!e) continue;
        char acc[32];
        std::snprintf(acc, sizeof acc, "%.4f", e->accuracy);
        out += csv_field(model) + "," + csv_field(cond) + "," + std::string(split_name(s)) + "," + acc + "," +
               std::to_string(e->n) + "," + std::to_string(e->failures) + "\n";
      }
    }
  }
  return out;
}

ScoreSheet ScoreSheet::from_records(const std::vector<EvalRecord>& records) {
  struct Tally {
    std::size_t n = 0, correct = 0, failures = 0;
  };
  std::vector<std::tuple<std::string, std::string, Split>> order;
  std::map<std::tuple<std::string, std::string, Split>, Tally> tallies;
  for (const auto& r : records) {
    auto key = std::make_tuple(r.model, condition_label(r.condition), r.split);
    auto [it, inserted] = tallies.try_emplace(key);
    if (inserted) order.push_back(key);
    ++it->second.n;
    it->second.correct += r.correct;
    it->second.failures += r.status != RecordStatus::kOk;
  }
  ScoreSheet sheet;
  for (const auto& key : order) {
    const Tally& t = tallies[key];
    sheet.set(std::get<0>(key), std::get<1>(key), std::get<2>(key),
              Entry{100.0 * static_cast<double>(t.correct) / static_cast<double>(t.n), t.n, t.failures});
  }
  return sheet;
}

void ScoreSheet::merge(const ScoreSheet& other) {
  for (const auto& cond : other.condition_order_) {
    for (const auto& model : other.models(cond)) {
      for (Split s : kAllSplits) {
        if (auto e = other.get(model, cond, s)) set(model, cond, s, *e);
      }
    }
  }
}

std::vector<double> model_values(const ScoreSheet& sheet, std::string_view condition, Category c) {
  std::vector<double> out;
  for (const auto& m : sheet.models(condition)) {
    if (auto v = sheet.category(m, condition, c)) out.push_back(*v);
  }
  return out;
}

double pooled_accuracy(const ScoreSheet& sheet, std::string_view condition, Category c) {
  const auto values = model_values(sheet, condition, c);
  if (values.empty()) {
    throw Error(Errc::kEmptyGroup, "no " + std::string(category_name(c)) + " scores for '" + std::string(condition) + "'");
  }
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

MeanStd grouped_mean_std(const std::vector<double>& values) {
  if (values.size() < 2) throw Error(Errc::kGroupTooSmall, "need at least two values, got " + std::to_string(values.size()));
  MeanStd r;
  r.n = values.size();
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(r.n);
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(r.n - 1));
  return r;
}

DeltaSeries condition_delta(const ScoreSheet& sheet, std::string_view minuend, std::string_view subtrahend,
                            Category c, std::string name) {
  DeltaSeries d;
  d.name = name.empty() ? std::string(minuend) + "-" + std::string(subtrahend) : std::move(name);
  d.category = c;
  const auto models = sheet.models(minuend);
  auto other = sheet.models(subtrahend);
  auto sorted = models;
  std::sort(sorted.begin(), sorted.end());
  std::sort(other.begin(), other.end());
  if (models.empty() || sorted != other) {
    throw Error(Errc::kModelSetMismatch,
                "'" + std::string(minuend) + "' and '" + std::string(subtrahend) + "' cover different models");
  }
  for (const auto& m : models) {
    const auto a = sheet.category(m, minuend, c);
    const auto b = sheet.category(m, subtrahend, c);
    if (!a || !b) {
      throw Error(Errc::kModelSetMismatch, m + " lacks " + std::string(category_name(c)) + " scores for '" +
                                               std::string(a ? subtrahend : minuend) + "'");
    }
    d.per_model.emplace_back(m, *a - *b);
  }
  double sum = 0.0;
  for (const auto& [m, v] : d.per_model) sum += v;
  d.mean = sum / static_cast<double>(d.per_model.size());
  return d;
}

std::vector<DeltaSeries> delta_table(const ScoreSheet& sheet) {
  std::vector<DeltaSeries> out;
  for (Category c : kAllCategories) {
    out.push_back(condition_delta(sheet, "AD", "Base", c, "AD-Base"));
    out.push_back(condition_delta(sheet, "AP", "Base", c, "AP-Base"));
    out.push_back(condition_delta(sheet, "AP+C", "AP", c, "AP+C-AP"));
  }
  return out;
}

double chi_square(const Contingency2x2& t) {
  const double a = static_cast<double>(t.a), b = static_cast<double>(t.b);
  const double c = static_cast<double>(t.c), d = static_cast<double>(t.d);
  const double rows[2] = {a + b, c + d};
  const double cols[2] = {a + c, b + d};
  if (rows[0] == 0 || rows[1] == 0 || cols[0] == 0 || cols[1] == 0) {
    throw Error(Errc::kDegenerateMarginal, "a row or column of the contingency table is empty");
  }
  const double n = rows[0] + rows[1];
  const double observed[2][2] = {{a, b}, {c, d}};
  double stat = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = rows[i] * cols[j] / n;
      stat += (observed[i][j] - expected) * (observed[i][j] - expected) / expected;
    }
  }
  return stat;
}

ClassAsymmetry class_asymmetry(const std::vector<EvalRecord>& records, std::optional<Split> split) {
  ClassAsymmetry r;
  for (const auto& rec : records) {
    if (split && rec.split != *split) continue;
    const bool pos = rec.gold == Label::kPos;
    (pos ? r.n_pos : r.n_neg)++;
    if (pos) (rec.correct ? r.table.a : r.table.b)++;
    else (rec.correct ? r.table.c : r.table.d)++;
    if (!rec.predicted) ++r.predicted_none;
    else if (*rec.predicted == Label::kPos) ++r.predicted_pos;
    else ++r.predicted_neg;
  }
  if (r.n_pos == 0 || r.n_neg == 0) throw Error(Errc::kMissingClass, "records do not contain both gold classes");
  r.acc_pos = 100.0 * static_cast<double>(r.table.a) / static_cast<double>(r.n_pos);
  r.acc_neg = 100.0 * static_cast<double>(r.table.c) / static_cast<double>(r.n_neg);
  try {
    r.chi_square = chi_square(r.table);
  } catch (const Error&) {
    r.chi_square.reset();
  }
  return r;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals + 6, std::fabs(value));
  const std::string s = buf;
  const std::size_t dot = s.find('.');
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  std::size_t int_len = dot;
  const std::size_t keep = int_len + static_cast<std::size_t>(decimals);
  const bool up = digits[keep] >= '5';
  digits.resize(keep);
  if (up) {
    std::size_t i = keep;
    while (i > 0 && digits[i - 1] == '9') digits[--i] = '0';
    if (i == 0) {
      digits.insert(digits.begin(), '1');
      ++int_len;
    } else {
      ++digits[i - 1];
    }
  }
  std::string out = digits.substr(0, int_len);
  if (decimals > 0) out += "." + digits.substr(int_len);
  const bool zero = digits.find_first_not_of('0') == std::string::npos;
  return (value < 0 && !zero ? "-" : "") + out;
}

std::string format_signed(double value, int decimals) {
  std::string s = format_fixed(value, decimals);
  if (s.front() != '-' && s.find_first_not_of("0.") != std::string::npos) s.insert(s.begin(), '+');
  return s;
}

std::string TextTable::to_markdown() const {
  std::string out = "## " + title + "\n\n";
  if (!header.empty()) {
    out += "|";
    for (const auto& h : header) out += " " + h + " |";
    out += "\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
    out += "\n";
    for (const auto& row : rows) {
      out += "|";
      for (const auto& cell : row) out += " " + cell + " |";
      out += "\n";
    }
  }
  if (!notes.empty()) {
    out += "\n";
    for (const auto& n : notes) out += "Note: " + n + "\n";
  }
  return out;
}

std::string TextTable::to_csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
    out += "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::vector<std::string_view> report_table_names() {
  return {"table1", "fig2", "grounded", "shuffle", "asymmetry", "failures"};
}

std::vector<TextTable> build_report(const ScoreSheet& sheet, const std::vector<EvalRecord>& records,
                                    const std::vector<std::string>& names) {
  std::vector<TextTable> out;
  for (const auto& name : names) {
    if (name == "table1") out.push_back(table1(sheet));
    else if (name == "fig2") out.push_back(fig2(sheet));
    else if (name == "grounded")
      out.push_back(summary_table(sheet, "grounded", "Grounded conditions: mean accuracy (%) across models",
                                  {"Grounded AD", "Grounded AP", "Grounded Base"},
                                  {Category::kBD, Category::kFF, Category::kHD}));
    else if (name == "shuffle")
      out.push_back(summary_table(sheet, "shuffle", "Randomization controls: mean accuracy (%) across models",
                                  {"Categories Shuffle", "Test Sequence Shuffle"}, {Category::kBD, Category::kFF}));
    else if (name == "asymmetry") out.push_back(asymmetry(records));
    else if (name == "failures") out.push_back(failures(records));
    else throw Error(Errc::kConfigError, "unknown table '" + name + "'");
  }
  return out;
}

std::vector<fs::path> emit_report(const std::vector<TextTable>& tables, ReportFormat format, const fs::path& dir) {
  std::vector<fs::path> written;
  for (const auto& t : tables) {
    const fs::path file = dir / (t.name + (format == ReportFormat::kMarkdown ? ".md" : ".csv"));
    detail::write_text(file, format == ReportFormat::kMarkdown ? t.to_markdown() : t.to_csv());
    written.push_back(file);
  }
  return written;
}

}  // namespace cg
