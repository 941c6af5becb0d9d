#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cg/harness.hpp"

namespace cg {

// Display labels used by the result tables.
//   ap -> "AP", ad -> "AD", ap,concept -> "AP+C", ad,concept -> "AD+C",
//   ap,minimal -> "Base", ad,minimal -> "Base (AD)", image -> "Visual",
//   ap,grounded -> "Grounded AP", ad,grounded -> "Grounded AD", *,minimal,grounded -> "Grounded Base",
//   ap,shuffle-cat:S -> "Categories Shuffle", ap,shuffle-seq:S -> "Test Sequence Shuffle".
// Any other combination is labelled by its canonical spec.
std::string condition_label(const Condition& c);
std::string condition_label(std::string_view spec);

// Reporting categories: HD is the mean of HD_COMB and HD_NOVEL.
enum class Category { kFF, kBD, kHD };
inline constexpr Category kAllCategories[] = {Category::kFF, Category::kBD, Category::kHD};
std::string_view category_name(Category c);

// ---------------------------------------------------------------------------
// Record-level aggregation

enum class GroupKey { kModel, kCondition, kSplit, kClass };

struct ResultRow {
  std::vector<std::string> keys;  // parallel to ResultTable::group_by
  std::size_t n = 0;
  std::size_t correct = 0;
  std::size_t parse_failures = 0;  // parse and transport failures
  double accuracy = 0.0;           // 100 * correct / n
};

struct ResultTable {
  std::vector<GroupKey> group_by;
  std::vector<ResultRow> rows;  // sorted by keys
};

// EmptyGroup when records is empty. With merge_hd and a kSplit key, each
// HD_COMB/HD_NOVEL pair gains an "HD" row holding the mean of their accuracies
// (rows stay sorted by keys, so "HD" precedes its halves).
ResultTable accuracy_table(const std::vector<EvalRecord>& records, const std::vector<GroupKey>& group_by,
                           bool merge_hd = false);

// ---------------------------------------------------------------------------
// Per-model score sheets (published tables or aggregated logs)

class ScoreSheet {
 public:
  struct Entry {
    double accuracy = 0.0;
    std::size_t n = 0;         // 0 when unknown (published figures)
    std::size_t failures = 0;  // parse + transport failures
  };

  void set(const std::string& model, const std::string& condition, Split split, Entry entry);
  std::optional<Entry> get(std::string_view model, std::string_view condition, Split split) const;
  // Per-model accuracy for a category; HD needs both HD splits.
  std::optional<double> category(std::string_view model, std::string_view condition, Category c) const;

  std::vector<std::string> conditions() const;  // first-seen order
  std::vector<std::string> models(std::string_view condition) const;  // first-seen order
  bool empty() const noexcept { return entries_.empty(); }

  // Long CSV: model,condition,split,accuracy[,n,failures]
  static ScoreSheet load_csv(const std::filesystem::path& file);
  static ScoreSheet parse_csv(std::string_view text);
  std::string to_csv() const;
  // Per (model, condition label, split) accuracies from records.
  static ScoreSheet from_records(const std::vector<EvalRecord>& records);
  // Entries of `other` are added; existing ones are replaced.
  void merge(const ScoreSheet& other);

 private:
  struct Key {
    std::string model, condition;
    Split split;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, Entry> entries_;
  std::vector<std::string> condition_order_;
  std::map<std::string, std::vector<std::string>, std::less<>> model_order_;
};

// Mean over models of the per-model category accuracy; EmptyGroup if no model has it.
double pooled_accuracy(const ScoreSheet& sheet, std::string_view condition, Category c);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) standard deviation
  std::size_t n = 0;
};

// GroupTooSmall for fewer than two values.
MeanStd grouped_mean_std(const std::vector<double>& values);

// Per-model values of one condition and category, in the sheet's model order.
std::vector<double> model_values(const ScoreSheet& sheet, std::string_view condition, Category c);

// ---------------------------------------------------------------------------
// Per-model deltas

struct DeltaSeries {
  std::string name;  // e.g. "AD-Base"
  Category category = Category::kFF;
  std::vector<std::pair<std::string, double>> per_model;  // percentage points
  double mean = 0.0;
};

// minuend - subtrahend for each model; ModelSetMismatch unless both conditions
// cover exactly the same models with the category available.
DeltaSeries condition_delta(const ScoreSheet& sheet, std::string_view minuend, std::string_view subtrahend,
                            Category c, std::string name = {});

// AD-Base, AP-Base and AP+C-AP for FF, BD and HD (category-major order).
std::vector<DeltaSeries> delta_table(const ScoreSheet& sheet);

// ---------------------------------------------------------------------------
// Class asymmetry

// [[a, b], [c, d]]: rows are gold classes (pos, neg), columns correct / incorrect.
struct Contingency2x2 {
  std::uint64_t a = 0, b = 0, c = 0, d = 0;
};

// Pearson statistic without continuity correction (df = 1). DegenerateMarginal
// if any row or column total is zero.
double chi_square(const Contingency2x2& t);

struct ClassAsymmetry {
  std::size_t n_pos = 0, n_neg = 0;
  double acc_pos = 0.0, acc_neg = 0.0;  // percent correct per gold class
  std::size_t predicted_pos = 0, predicted_neg = 0, predicted_none = 0;
  Contingency2x2 table;
  std::optional<double> chi_square;  // empty when a marginal is zero
};

// Over records of one split (all splits when empty). MissingClass unless both gold classes occur.
ClassAsymmetry class_asymmetry(const std::vector<EvalRecord>& records, std::optional<Split> split = std::nullopt);

// ---------------------------------------------------------------------------
// Reports

// One decimal, round half away from zero (applied to the decimal expansion, so
// 62.35 -> "62.4").
std::string format_fixed(double value, int decimals = 1);
std::string format_signed(double value, int decimals = 1);  // "+0.8", "-0.6", "0.0"

struct TextTable {
  std::string name;  // file stem
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;

  std::string to_markdown() const;
  std::string to_csv() const;
};

// Table names: table1, fig2, grounded, shuffle, asymmetry, failures.
std::vector<std::string_view> report_table_names();

// Builds the requested tables from a score sheet and (optionally) raw records;
// tables that need records or missing conditions carry a note instead of rows.
std::vector<TextTable> build_report(const ScoreSheet& sheet, const std::vector<EvalRecord>& records,
                                    const std::vector<std::string>& names);

enum class ReportFormat { kMarkdown, kCsv };

// One file per table, "<dir>/<name>.md" or ".csv". Returns the written paths. IoError.
std::vector<std::filesystem::path> emit_report(const std::vector<TextTable>& tables, ReportFormat format,
                                               const std::filesystem::path& dir);

}  // namespace cg
