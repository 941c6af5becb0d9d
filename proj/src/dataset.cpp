#include "cg/dataset.hpp"

#include <algorithm>
#include <set>

#include "cg/rng.hpp"
#include "json_io.hpp"

namespace cg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kFF: return "FF";
    case Split::kBD: return "BD";
    case Split::kHDComb: return "HD_COMB";
    case Split::kHDNovel: return "HD_NOVEL";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view name) {
  for (Split s : kAllSplits) {
    if (split_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view label_name(Label l) { return l == Label::kPos ? "pos" : "neg"; }

std::optional<Label> parse_label(std::string_view name) {
  if (name == "pos") return Label::kPos;
  if (name == "neg") return Label::kNeg;
  return std::nullopt;
}

std::string_view partition_name(Partition p) {
  switch (p) {
    case Partition::kTrain: return "train";
    case Partition::kVal: return "val";
    case Partition::kTest: return "test";
  }
  return "?";
}

std::optional<Partition> parse_partition(std::string_view name) {
  if (name == "train") return Partition::kTrain;
  if (name == "val") return Partition::kVal;
  if (name == "test") return Partition::kTest;
  return std::nullopt;
}

std::string_view query_policy_name(QueryPolicy p) {
  switch (p) {
    case QueryPolicy::kHeldOutPos: return "held-out-pos";
    case QueryPolicy::kHeldOutNeg: return "held-out-neg";
    case QueryPolicy::kCoin: return "coin";
    case QueryPolicy::kBoth: return "both";
  }
  return "?";
}

std::optional<QueryPolicy> parse_query_policy(std::string_view name) {
  for (QueryPolicy p : {QueryPolicy::kHeldOutPos, QueryPolicy::kHeldOutNeg, QueryPolicy::kCoin, QueryPolicy::kBoth}) {
    if (query_policy_name(p) == name) return p;
  }
  return std::nullopt;
}

void BongardProblem::validate() const {
  if (positives.size() != kSupportPerClass || negatives.size() != kSupportPerClass) {
    throw Error(Errc::kSchemaMismatch, id + ": expected 6 positive and 6 negative support images");
  }
  for (const auto* set : {&positives, &negatives}) {
    if (std::find(set->begin(), set->end(), query) != set->end()) {
      throw Error(Errc::kSchemaMismatch, id + ": query image duplicates a support image");
    }
  }
}

namespace {

fs::path image_file(const RawProblem& raw, Label cls, std::size_t k) {
  if (raw.image_root.empty()) return {};
  return raw.image_root / raw.id / (cls == Label::kPos ? "1" : "0") / (std::to_string(k) + ".png");
}

BongardProblem select_with(const RawProblem& raw, Label gold) {
  if (raw.pos.size() < kSupportPerClass + 1 || raw.neg.size() < kSupportPerClass + 1) {
    throw Error(Errc::kInsufficientImages, raw.id + ": need at least 7 images per class, have " +
                                               std::to_string(raw.pos.size()) + "+" + std::to_string(raw.neg.size()));
  }
  BongardProblem p;
  p.id = raw.id;
  p.split = raw.split;
  p.concept_text = raw.concept_text;
  p.positives.assign(raw.pos.begin(), raw.pos.begin() + kSupportPerClass);
  p.negatives.assign(raw.neg.begin(), raw.neg.begin() + kSupportPerClass);
  p.query = gold == Label::kPos ? raw.pos[kSupportPerClass] : raw.neg[kSupportPerClass];
  p.gold = gold;
  if (!raw.image_root.empty()) {
    for (std::size_t k = 0; k < kSupportPerClass; ++k) {
      p.positive_files.push_back(image_file(raw, Label::kPos, k));
      p.negative_files.push_back(image_file(raw, Label::kNeg, k));
    }
    p.query_file = image_file(raw, gold, kSupportPerClass);
  }
  return p;
}

json image_to_json(const BongardImage& img) { return serialize_image(img); }

BongardImage image_from_json(const json& j, const std::string& trail) {
  if (!j.is_array()) throw Error(Errc::kSchemaMismatch, trail + ": expected array of shapes");
  TokenImage tokens;
  for (std::size_t s = 0; s < j.size(); ++s) {
    if (!j[s].is_array()) throw Error(Errc::kSchemaMismatch, trail + "[" + std::to_string(s) + "]: expected array");
    TokenShape shape;
    for (std::size_t a = 0; a < j[s].size(); ++a) {
      if (!j[s][a].is_string()) {
        throw Error(Errc::kSchemaMismatch,
                    trail + "[" + std::to_string(s) + "][" + std::to_string(a) + "]: expected string");
      }
      shape.push_back(j[s][a].get<std::string>());
    }
    tokens.push_back(std::move(shape));
  }
  return parse_image(tokens);
}

std::vector<BongardImage> images_from_json(const json& j, const std::string& trail) {
  if (!j.is_array()) throw Error(Errc::kSchemaMismatch, trail + ": expected array of images");
  std::vector<BongardImage> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(image_from_json(j[i], trail + "[" + std::to_string(i) + "]"));
  return out;
}

// Support/query disjointness for both candidate queries.
std::optional<std::string> disjointness_fault(const RawProblem& raw) {
  if (raw.pos.size() <= kSupportPerClass || raw.neg.size() <= kSupportPerClass) return std::nullopt;
  auto support_contains = [&](const BongardImage& img) {
    for (std::size_t k = 0; k < kSupportPerClass; ++k) {
      if (raw.pos[k] == img || raw.neg[k] == img) return true;
    }
    return false;
  };
  if (support_contains(raw.pos[kSupportPerClass])) return "positive query candidate duplicates a support image";
  if (support_contains(raw.neg[kSupportPerClass])) return "negative query candidate duplicates a support image";
  return std::nullopt;
}

std::optional<Split> split_from_prefix(std::string_view s) {
  if (s.starts_with("ff")) return Split::kFF;
  if (s.starts_with("bd")) return Split::kBD;
  if (s.starts_with("hd")) return Split::kHDComb;
  return std::nullopt;
}

fs::path find_file(const fs::path& root, const std::string& name) {
  if (fs::exists(root / name)) return root / name;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() == name) return e.path();
  }
  return {};
}

}  // namespace

BongardProblem select_query(const RawProblem& raw, QueryPolicy policy, std::uint64_t seed) {
  switch (policy) {
    case QueryPolicy::kHeldOutPos: return select_with(raw, Label::kPos);
    case QueryPolicy::kHeldOutNeg: return select_with(raw, Label::kNeg);
    case QueryPolicy::kCoin: {
      Rng rng(derive_seed(seed, raw.id));
      return select_with(raw, rng.coin() ? Label::kPos : Label::kNeg);
    }
    case QueryPolicy::kBoth: break;
  }
  throw Error(Errc::kPrecondition, "select_query yields one problem; use materialize for the 'both' policy");
}

std::vector<BongardProblem> materialize(const RawProblem& raw, QueryPolicy policy, std::uint64_t seed) {
  if (policy != QueryPolicy::kBoth) return {select_query(raw, policy, seed)};
  auto p = select_with(raw, Label::kPos);
  auto n = select_with(raw, Label::kNeg);
  p.id += "#pos";
  n.id += "#neg";
  return {std::move(p), std::move(n)};
}

std::size_t ImportReport::total() const {
  std::size_t n = 0;
  for (const auto& [_, c] : counts) n += c;
  return n;
}

Corpus::Corpus(std::vector<RawProblem> problems) : problems_(std::move(problems)) {
  std::sort(problems_.begin(), problems_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < problems_.size(); ++i) {
    if (!index_.emplace(problems_[i].id, i).second) {
      throw Error(Errc::kSchemaMismatch, "duplicate problem id " + problems_[i].id);
    }
  }
}

const RawProblem* Corpus::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &problems_[it->second];
}

const RawProblem& Corpus::at(std::string_view id) const {
  const auto* p = find(id);
  if (!p) throw Error(Errc::kSchemaMismatch, "unknown problem id " + std::string(id));
  return *p;
}

std::map<Split, std::size_t> Corpus::counts() const {
  std::map<Split, std::size_t> out;
  for (const auto& p : problems_) ++out[p.split];
  return out;
}

std::vector<std::string> Corpus::test_ids(Split split) const {
  std::vector<std::string> ids;
  for (const auto& p : problems_) {
    if (p.split == split && p.partition == Partition::kTest) ids.push_back(p.id);
  }
  return ids;  // already sorted
}

void Corpus::save(const fs::path& dir) const {
  fs::create_directories(dir);
  for (Split split : kAllSplits) {
    json problems = json::object();
    fs::path image_root;
    for (const auto& p : problems_) {
      if (p.split != split) continue;
      json entry;
      entry["concept"] = p.concept_text ? json(*p.concept_text) : json(nullptr);
      entry["partition"] = partition_name(p.partition);
      entry["pos"] = json::array();
      entry["neg"] = json::array();
      for (const auto& img : p.pos) entry["pos"].push_back(image_to_json(img));
      for (const auto& img : p.neg) entry["neg"].push_back(image_to_json(img));
      if (!p.image_root.empty()) {
        std::error_code ec;
        const fs::path rel = fs::relative(p.image_root, dir, ec);
        entry["image_root"] = (ec || rel.empty() ? fs::absolute(p.image_root) : rel).generic_string();
      }
      problems[p.id] = std::move(entry);
    }
    if (problems.empty()) continue;
    json doc{{"format", "cg-corpus/1"}, {"split", split_name(split)}, {"problems", std::move(problems)}};
    detail::write_text(dir / (std::string(split_name(split)) + ".json"), doc.dump(1) + "\n");
  }
}

Corpus Corpus::load(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::kMissingFile, "corpus directory " + dir.string());
  std::vector<RawProblem> problems;
  bool any = false;
  for (Split split : kAllSplits) {
    const fs::path file = dir / (std::string(split_name(split)) + ".json");
    if (!fs::exists(file)) continue;
    any = true;
    const json doc = detail::read_json(file);
    const std::string trail = file.filename().string();
    if (!doc.is_object() || doc.value("format", "") != "cg-corpus/1" || !doc.contains("problems") ||
        !doc["problems"].is_object()) {
      throw Error(Errc::kSchemaMismatch, trail + ": not a cg-corpus/1 document");
    }
    for (const auto& [id, entry] : doc["problems"].items()) {
      const std::string t = trail + ": $." + id;
      RawProblem p;
      p.id = id;
      p.split = split;
      if (entry.contains("concept") && entry["concept"].is_string()) p.concept_text = entry["concept"].get<std::string>();
      const auto part = parse_partition(entry.value("partition", "test"));
      if (!part) throw Error(Errc::kSchemaMismatch, t + ".partition: unknown value");
      p.partition = *part;
      if (!entry.contains("pos") || !entry.contains("neg")) throw Error(Errc::kSchemaMismatch, t + ": missing pos/neg");
      p.pos = images_from_json(entry["pos"], t + ".pos");
      p.neg = images_from_json(entry["neg"], t + ".neg");
      if (entry.contains("image_root") && entry["image_root"].is_string()) {
        fs::path root = entry["image_root"].get<std::string>();
        p.image_root = root.is_relative() ? dir / root : root;
      }
      problems.push_back(std::move(p));
    }
  }
  if (!any) throw Error(Errc::kMissingFile, "no <SPLIT>.json documents in " + dir.string());
  return Corpus(std::move(problems));
}

Corpus import_corpus(const fs::path& root, ImportReport* report) {
  if (!fs::is_directory(root)) throw Error(Errc::kMissingFile, "dataset root " + root.string());
  std::vector<fs::path> program_files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.ends_with("_action_programs.json")) program_files.push_back(e.path());
  }
  std::sort(program_files.begin(), program_files.end());
  if (program_files.empty()) throw Error(Errc::kMissingFile, "no *_action_programs.json under " + root.string());

  std::map<std::string, Partition, std::less<>> partition_of;
  std::set<std::string, std::less<>> hd_novel;
  const fs::path split_file = find_file(root, "ShapeBongard_V2_split.json");
  const bool have_split_file = !split_file.empty();
  if (have_split_file) {
    const json sj = detail::read_json(split_file);
    if (!sj.is_object()) throw Error(Errc::kSchemaMismatch, split_file.string() + ": expected object");
    for (const auto& [key, ids] : sj.items()) {
      if (!ids.is_array()) throw Error(Errc::kSchemaMismatch, split_file.string() + ": $." + key + ": expected array");
      Partition part = Partition::kTest;
      if (key == "train") part = Partition::kTrain;
      else if (key == "val") part = Partition::kVal;
      else if (!key.starts_with("test")) continue;
      for (const auto& id : ids) {
        if (!id.is_string()) throw Error(Errc::kSchemaMismatch, split_file.string() + ": $." + key + ": expected strings");
        partition_of[id.get<std::string>()] = part;
        if (key == "test_hd_novel") hd_novel.insert(id.get<std::string>());
      }
    }
  }

  std::map<std::string, std::string, std::less<>> concepts;
  if (const fs::path cf = find_file(root, "concepts.json"); !cf.empty()) {
    const json cj = detail::read_json(cf);
    if (!cj.is_object()) throw Error(Errc::kSchemaMismatch, cf.string() + ": expected object");
    for (const auto& [id, c] : cj.items()) {
      if (c.is_string()) concepts[id] = c.get<std::string>();
    }
  }

  ImportReport local;
  ImportReport& rep = report ? *report : local;
  rep = ImportReport{};
  std::vector<RawProblem> problems;
  for (const auto& file : program_files) {
    const json doc = detail::read_json(file);
    const std::string fname = file.filename().string();
    if (!doc.is_object()) throw Error(Errc::kSchemaMismatch, fname + ": expected object keyed by problem id");
    const fs::path images = file.parent_path() / "images";
    for (const auto& [id, value] : doc.items()) {
      const std::string trail = fname + ": $." + id;
      if (!value.is_array() || value.size() != 2) {
        throw Error(Errc::kSchemaMismatch, trail + ": expected [positives, negatives]");
      }
      RawProblem p;
      p.id = id;
      auto split = split_from_prefix(id);
      if (!split) split = split_from_prefix(fname);
      if (!split) throw Error(Errc::kSchemaMismatch, trail + ": cannot infer split from id or file name");
      p.split = *split;
      if (p.split == Split::kHDComb && hd_novel.count(id)) p.split = Split::kHDNovel;
      if (have_split_file) {
        auto it = partition_of.find(id);
        p.partition = it == partition_of.end() ? Partition::kTrain : it->second;
      }
      if (auto it = concepts.find(id); it != concepts.end()) p.concept_text = it->second;
      p.pos = images_from_json(value[0], trail + "[0]");
      p.neg = images_from_json(value[1], trail + "[1]");
      if (fs::is_directory(images / id)) p.image_root = images;
      if (p.pos.size() <= kSupportPerClass || p.neg.size() <= kSupportPerClass) {
        rep.warnings.push_back(id + ": fewer than 7 images per class; no query can be selected");
      }
      if (auto fault = disjointness_fault(p)) {
        rep.skipped.push_back(id + ": " + *fault);
        continue;
      }
      for (const auto& img : p.pos) {
        for (const auto& w : validate_image(img)) rep.warnings.push_back(id + ": " + w);
      }
      for (const auto& img : p.neg) {
        for (const auto& w : validate_image(img)) rep.warnings.push_back(id + ": " + w);
      }
      ++rep.counts[p.split];
      ++rep.partitions[p.partition];
      problems.push_back(std::move(p));
    }
  }
  return Corpus(std::move(problems));
}

void SubsetManifest::save(const fs::path& file) const {
  json per = json::object();
  for (const auto& [s, n] : per_split) per[std::string(split_name(s))] = n;
  json doc{{"format", "cg-manifest/1"},
           {"seed", seed},
           {"query_policy", query_policy_name(query_policy)},
           {"per_split", per},
           {"ids", ids}};
  detail::write_text(file, doc.dump(1) + "\n");
}

SubsetManifest SubsetManifest::load(const fs::path& file) {
  const json doc = detail::read_json(file);
  const std::string t = file.string();
  if (!doc.is_object() || doc.value("format", "") != "cg-manifest/1") {
    throw Error(Errc::kSchemaMismatch, t + ": not a cg-manifest/1 document");
  }
  SubsetManifest m;
  try {
    m.seed = doc.at("seed").get<std::uint64_t>();
    const auto policy = parse_query_policy(doc.value("query_policy", "coin"));
    if (!policy) throw Error(Errc::kSchemaMismatch, t + ": $.query_policy unknown");
    m.query_policy = *policy;
    const json per = doc.value("per_split", json::object());
    for (const auto& [k, v] : per.items()) {
      const auto s = parse_split(k);
      if (!s) throw Error(Errc::kSchemaMismatch, t + ": $.per_split." + k + " unknown split");
      m.per_split[*s] = v.get<std::size_t>();
    }
    m.ids = doc.at("ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(Errc::kSchemaMismatch, t + ": " + e.what());
  }
  return m;
}

SubsetManifest sample_subset(const Corpus& corpus, const SubsetSpec& spec, QueryPolicy policy) {
  SubsetManifest m;
  m.seed = spec.seed;
  m.query_policy = policy;
  for (Split split : kAllSplits) {
    auto it = spec.per_split.find(split);
    if (it == spec.per_split.end()) continue;
    const std::size_t count = it->second;
    std::vector<std::string> ids = corpus.test_ids(split);
    if (count > ids.size()) {
      throw Error(Errc::kCountExceedsSplit, std::string(split_name(split)) + ": requested " + std::to_string(count) +
                                                ", available " + std::to_string(ids.size()));
    }
    // Partial Fisher-Yates: the first `count` slots end up a uniform sample.
    Rng rng(derive_seed(spec.seed, split_name(split)));
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(ids.size() - i));
      std::swap(ids[i], ids[j]);
    }
    ids.resize(count);
    std::sort(ids.begin(), ids.end());
    m.per_split[split] = count;
    m.ids.insert(m.ids.end(), ids.begin(), ids.end());
  }
  return m;
}

std::vector<BongardProblem> load_problems(const Corpus& corpus, const SubsetManifest& manifest) {
  std::vector<BongardProblem> out;
  out.reserve(manifest.ids.size());
  for (const auto& id : manifest.ids) {
    for (auto& p : materialize(corpus.at(id), manifest.query_policy, manifest.seed)) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace cg
