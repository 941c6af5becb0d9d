#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cg/grammar.hpp"

namespace cg {

enum class Split { kFF, kBD, kHDComb, kHDNovel };
inline constexpr Split kAllSplits[] = {Split::kFF, Split::kBD, Split::kHDComb, Split::kHDNovel};

std::string_view split_name(Split s);  // "FF", "BD", "HD_COMB", "HD_NOVEL"
std::optional<Split> parse_split(std::string_view name);

enum class Label { kPos, kNeg };
std::string_view label_name(Label l);  // "pos" / "neg"
std::optional<Label> parse_label(std::string_view name);

enum class Partition { kTrain, kVal, kTest };
std::string_view partition_name(Partition p);
std::optional<Partition> parse_partition(std::string_view name);

inline constexpr std::size_t kSupportPerClass = 6;

// A problem as distributed: at least 7 images per class, no query chosen yet.
struct RawProblem {
  std::string id;
  Split split = Split::kFF;
  Partition partition = Partition::kTest;
  std::optional<std::string> concept_text;
  std::vector<BongardImage> pos;
  std::vector<BongardImage> neg;
  // Directory holding "<id>/1/<k>.png" (positives) and "<id>/0/<k>.png"; empty if unknown.
  std::filesystem::path image_root;
};

// Six positives, six negatives and one query with its gold label. The *_files
// members are parallel to the images (empty when no rendered images exist).
struct BongardProblem {
  std::string id;
  Split split = Split::kFF;
  std::optional<std::string> concept_text;
  std::vector<BongardImage> positives;
  std::vector<BongardImage> negatives;
  BongardImage query;
  Label gold = Label::kPos;
  std::vector<std::filesystem::path> positive_files;
  std::vector<std::filesystem::path> negative_files;
  std::filesystem::path query_file;

  // Throws SchemaMismatch when the 6/6/1 shape or support/query disjointness is violated.
  void validate() const;
};

enum class QueryPolicy { kHeldOutPos, kHeldOutNeg, kCoin, kBoth };
std::string_view query_policy_name(QueryPolicy p);
std::optional<QueryPolicy> parse_query_policy(std::string_view name);

// First six of each class become support; the seventh image of the class picked
// by the policy becomes the query. kBoth is rejected here (see materialize).
BongardProblem select_query(const RawProblem& raw, QueryPolicy policy, std::uint64_t seed);

// One problem per raw record, or two ("<id>#pos", "<id>#neg") under kBoth.
// The coin is seeded with derive_seed(seed, raw.id).
std::vector<BongardProblem> materialize(const RawProblem& raw, QueryPolicy policy, std::uint64_t seed);

struct ImportReport {
  std::map<Split, std::size_t> counts;
  std::map<Partition, std::size_t> partitions;
  std::vector<std::string> skipped;   // "<id>: reason"
  std::vector<std::string> warnings;

  std::size_t total() const;
};

// Immutable after construction; problems are kept sorted by id.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<RawProblem> problems);

  const std::vector<RawProblem>& problems() const noexcept { return problems_; }
  const RawProblem* find(std::string_view id) const;
  const RawProblem& at(std::string_view id) const;  // SchemaMismatch if unknown
  std::map<Split, std::size_t> counts() const;
  // Sorted ids of the test partition for one split.
  std::vector<std::string> test_ids(Split split) const;

  // Canonical layout: one "<SPLIT>.json" document per split inside `dir`.
  void save(const std::filesystem::path& dir) const;
  static Corpus load(const std::filesystem::path& dir);

 private:
  std::vector<RawProblem> problems_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Adapter for the upstream distribution: "*_action_programs.json" files mapping
// problem id -> [positives, negatives] (each image a list of shapes, each shape a
// list of action tokens), an optional "ShapeBongard_V2_split.json" and an
// optional "concepts.json" (id -> concept text).
Corpus import_corpus(const std::filesystem::path& root, ImportReport* report = nullptr);

struct SubsetSpec {
  std::map<Split, std::size_t> per_split = {
      {Split::kFF, 500}, {Split::kBD, 500}, {Split::kHDComb, 500}, {Split::kHDNovel, 500}};
  std::uint64_t seed = 0;
};

struct SubsetManifest {
  std::uint64_t seed = 0;
  QueryPolicy query_policy = QueryPolicy::kCoin;
  std::map<Split, std::size_t> per_split;
  std::vector<std::string> ids;

  void save(const std::filesystem::path& file) const;
  static SubsetManifest load(const std::filesystem::path& file);
};

// Uniform without replacement within each split's sorted test ids; a pure
// function of (corpus, spec). Ids are listed split by split, sorted within each.
SubsetManifest sample_subset(const Corpus& corpus, const SubsetSpec& spec,
                             QueryPolicy policy = QueryPolicy::kCoin);

// Problems of a manifest in manifest order, queries chosen with the manifest's policy and seed.
std::vector<BongardProblem> load_problems(const Corpus& corpus, const SubsetManifest& manifest);

}  // namespace cg
