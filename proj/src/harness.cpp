#include "cg/harness.hpp"

#include <atomic>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "cg/hash.hpp"
#include "cg/perturb.hpp"
#include "cg/response.hpp"
#include "json_io.hpp"

namespace cg {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <class T>
T require(const toml::table& t, std::string_view table, std::string_view key) {
  const auto* node = t.get(key);
  if (!node) throw Error(Errc::kConfigError, "missing [" + std::string(table) + "] " + std::string(key));
  auto v = node->value<T>();
  if (!v) throw Error(Errc::kConfigError, "[" + std::string(table) + "] " + std::string(key) + " has the wrong type");
  return *v;
}

template <class T>
T optional_value(const toml::table& t, std::string_view table, std::string_view key, T fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  auto v = node->value<T>();
  if (!v) throw Error(Errc::kConfigError, "[" + std::string(table) + "] " + std::string(key) + " has the wrong type");
  return *v;
}

void reject_unknown(const toml::table& t, std::string_view table, std::initializer_list<std::string_view> known) {
  for (auto&& [k, v] : t) {
    bool ok = false;
    for (auto name : known) ok = ok || k.str() == name;
    if (!ok) throw Error(Errc::kConfigError, "unknown key [" + std::string(table) + "] " + std::string(k.str()));
  }
}

const toml::table& section(const toml::table& root, std::string_view name) {
  const auto* t = root.get_as<toml::table>(name);
  if (!t) throw Error(Errc::kConfigError, "missing [" + std::string(name) + "] table");
  return *t;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

using RecordKey = std::tuple<std::string, std::string, std::string>;

}  // namespace

std::string_view record_status_name(RecordStatus s) {
  switch (s) {
    case RecordStatus::kOk: return "ok";
    case RecordStatus::kParseFailure: return "parse_failure";
    case RecordStatus::kTransportFailure: return "transport_failure";
  }
  return "?";
}

std::optional<RecordStatus> parse_record_status(std::string_view name) {
  for (auto s : {RecordStatus::kOk, RecordStatus::kParseFailure, RecordStatus::kTransportFailure}) {
    if (record_status_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string EvalRecord::to_json_line() const {
  json j;
  j["problem_id"] = problem_id;
  j["split"] = split_name(split);
  j["condition"] = condition;
  j["model"] = model;
  j["seed"] = seed;
  j["predicted"] = predicted ? json(label_name(*predicted)) : json(nullptr);
  j["status"] = record_status_name(status);
  j["gold"] = label_name(gold);
  j["correct"] = correct;
  j["latency_s"] = latency_seconds;
  j["raw_sha256"] = raw_sha256;
  j["timestamp"] = timestamp;
  if (!error.empty()) j["error"] = error;
  return j.dump();
}

EvalRecord EvalRecord::from_json_line(std::string_view line) {
  const json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::kSchemaMismatch, "log line is not a JSON object");
  try {
    EvalRecord r;
    r.problem_id = j.at("problem_id").get<std::string>();
    const auto split = parse_split(j.at("split").get<std::string>());
    const auto gold = parse_label(j.at("gold").get<std::string>());
    const auto status = parse_record_status(j.at("status").get<std::string>());
    if (!split || !gold || !status) throw Error(Errc::kSchemaMismatch, r.problem_id + ": bad split, gold or status");
    r.split = *split;
    r.gold = *gold;
    r.status = *status;
    r.condition = j.at("condition").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("predicted").is_null()) {
      r.predicted = parse_label(j["predicted"].get<std::string>());
      if (!r.predicted) throw Error(Errc::kSchemaMismatch, r.problem_id + ": bad predicted label");
    }
    r.correct = j.at("correct").get<bool>();
    r.latency_seconds = j.value("latency_s", 0.0);
    r.raw_sha256 = j.value("raw_sha256", "");
    r.timestamp = j.value("timestamp", "");
    r.error = j.value("error", "");
    if (r.correct != (r.predicted && *r.predicted == r.gold)) {
      throw Error(Errc::kSchemaMismatch, r.problem_id + ": correct flag disagrees with labels");
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::kSchemaMismatch, std::string("log record: ") + e.what());
  }
}

std::vector<EvalRecord> read_log(const fs::path& file) {
  const std::string text = detail::read_text(file);
  std::vector<EvalRecord> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) break;  // torn final write
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(EvalRecord::from_json_line(line));
    } catch (const Error& e) {
      throw Error(Errc::kSchemaMismatch, file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

RunSpec RunSpec::from_toml(std::string_view text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(Errc::kConfigError, std::string(e.description()) + " at line " +
                                        std::to_string(e.source().begin.line));
  }
  reject_unknown(root, "", {"run", "backend"});
  const auto& r = section(root, "run");
  const auto& b = section(root, "backend");
  reject_unknown(r, "run", {"corpus", "manifest", "condition", "seed", "log", "cache_dir", "cache_bypass"});
  reject_unknown(b, "backend", {"kind", "model", "endpoint", "api_key_env", "temperature", "max_output_tokens",
                                "timeout_seconds", "max_retries", "max_in_flight", "multimodal", "backoff_base_ms",
                                "backoff_cap_ms"});

  RunSpec s;
  s.corpus = resolve(base_dir, require<std::string>(r, "run", "corpus"));
  s.manifest = resolve(base_dir, require<std::string>(r, "run", "manifest"));
  s.log = resolve(base_dir, require<std::string>(r, "run", "log"));
  const auto cache = optional_value<std::string>(r, "run", "cache_dir", "");
  if (!cache.empty()) s.cache_dir = resolve(base_dir, cache);
  s.cache_bypass = optional_value<bool>(r, "run", "cache_bypass", false);
  const auto seed = require<std::int64_t>(r, "run", "seed");
  if (seed < 0) throw Error(Errc::kConfigError, "[run] seed must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  try {
    s.condition = Condition::parse(require<std::string>(r, "run", "condition"));
  } catch (const Error& e) {
    throw Error(Errc::kConfigError, e.what());
  }

  const auto kind = parse_backend_kind(require<std::string>(b, "backend", "kind"));
  if (!kind) throw Error(Errc::kConfigError, "[backend] kind must be http-openai-style, http-gemini-style or reference");
  BackendConfig& c = s.backend;
  c.kind = *kind;
  c.model = require<std::string>(b, "backend", "model");
  c.endpoint = c.kind == BackendKind::kReference ? optional_value<std::string>(b, "backend", "endpoint", "")
                                                  : require<std::string>(b, "backend", "endpoint");
  c.api_key_env = optional_value<std::string>(b, "backend", "api_key_env", "");
  c.decoding.temperature = optional_value<double>(b, "backend", "temperature", c.decoding.temperature);
  c.decoding.max_output_tokens =
      static_cast<int>(optional_value<std::int64_t>(b, "backend", "max_output_tokens", c.decoding.max_output_tokens));
  c.timeout_seconds = optional_value<double>(b, "backend", "timeout_seconds", c.timeout_seconds);
  c.max_retries = static_cast<int>(optional_value<std::int64_t>(b, "backend", "max_retries", c.max_retries));
  c.max_in_flight = static_cast<int>(optional_value<std::int64_t>(b, "backend", "max_in_flight", c.max_in_flight));
  c.multimodal = optional_value<bool>(b, "backend", "multimodal", c.multimodal);
  c.backoff_base_ms = static_cast<int>(optional_value<std::int64_t>(b, "backend", "backoff_base_ms", c.backoff_base_ms));
  c.backoff_cap_ms = static_cast<int>(optional_value<std::int64_t>(b, "backend", "backoff_cap_ms", c.backoff_cap_ms));
  c.validate();
  return s;
}

RunSpec RunSpec::load(const fs::path& file) {
  return from_toml(detail::read_text(file), file.has_parent_path() ? file.parent_path() : fs::path("."));
}

BongardProblem apply_perturbation(const BongardProblem& problem, const Condition& condition) {
  const std::uint64_t seed = perturbation_seed(condition.perturbation_seed, problem.id);
  switch (condition.perturbation) {
    case Perturbation::kNone: return problem;
    case Perturbation::kCategories: return shuffle_categories(problem, seed);
    case Perturbation::kQuerySequence: return shuffle_query_sequence(problem, seed);
  }
  return problem;
}

EvalRecord evaluate_problem(Backend& backend, const BongardProblem& problem, const Condition& condition,
                            std::uint64_t seed) {
  EvalRecord r;
  r.problem_id = problem.id;
  r.split = problem.split;
  r.condition = condition.spec();
  r.model = backend.config().model;
  r.seed = seed;
  r.gold = problem.gold;
  const PromptBundle bundle = build_bundle(apply_perturbation(problem, condition), condition);
  try {
    const RawAnswer raw = backend.complete(bundle);
    r.latency_seconds = raw.latency_seconds;
    r.raw_sha256 = sha256_hex(raw.text);
    const ExtractResult parsed = extract_answer(raw.text, bundle.dialect);
    if (const auto* a = std::get_if<ParsedAnswer>(&parsed)) {
      r.predicted = a->conclusion;
      r.status = RecordStatus::kOk;
    } else {
      r.status = RecordStatus::kParseFailure;
      r.error = std::get<ParseFailure>(parsed).reason;
    }
  } catch (const Error& e) {
    if (e.code() == Errc::kUnsupportedModality) throw;
    r.status = RecordStatus::kTransportFailure;
    r.error = e.what();
  }
  r.correct = r.predicted && *r.predicted == r.gold;
  r.timestamp = utc_now();
  return r;
}

RunSummary run(const RunSpec& spec, const RunOptions& options) {
  // Everything that can be wrong with the configuration is checked before the first call.
  spec.condition.validate();
  spec.backend.validate();
  const Corpus corpus = Corpus::load(spec.corpus);
  const SubsetManifest manifest = SubsetManifest::load(spec.manifest);
  const std::vector<BongardProblem> problems = load_problems(corpus, manifest);
  if (spec.condition.uses_images() && (!spec.backend.multimodal || spec.backend.kind == BackendKind::kReference)) {
    throw Error(Errc::kUnsupportedModality, "condition '" + spec.condition.spec() + "' needs an image-capable backend");
  }
  for (const auto& p : problems) (void)build_bundle(apply_perturbation(p, spec.condition), spec.condition);

  Backend backend(spec.backend, spec.cache_dir, options.transport);
  backend.set_cache_bypass(spec.cache_bypass);
  if (spec.backend.kind != BackendKind::kReference && !problems.empty()) {
    (void)backend.build_request(PromptBundle{});  // AuthMissing surfaces here
  }

  const std::string cond = spec.condition.spec();
  std::set<RecordKey> done;
  std::vector<EvalRecord> existing;
  if (fs::exists(spec.log)) {
    existing = read_log(spec.log);
    for (const auto& r : existing) done.emplace(r.problem_id, r.condition, r.model);
  }
  std::vector<const BongardProblem*> pending;
  RunSummary summary;
  for (const auto& p : problems) {
    if (done.count({p.id, cond, spec.backend.model})) ++summary.skipped;
    else pending.push_back(&p);
  }

  if (spec.log.has_parent_path()) fs::create_directories(spec.log.parent_path());
  // Drop a torn last line (a record whose write never completed) so appended
  // records start on their own line.
  if (fs::exists(spec.log)) {
    const std::string text = detail::read_text(spec.log);
    const std::size_t keep = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
    if (keep != text.size()) fs::resize_file(spec.log, keep);
  }
  std::ofstream out(spec.log, std::ios::app | std::ios::binary);
  if (!out) throw Error(Errc::kIoError, "cannot open log " + spec.log.string());

  std::mutex write_mutex;
  std::vector<EvalRecord> fresh;
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next++;
      if (i >= pending.size()) return;
      try {
        EvalRecord r = evaluate_problem(backend, *pending[i], spec.condition, spec.seed);
        std::lock_guard lock(write_mutex);
        out << r.to_json_line() << '\n';
        out.flush();
        if (!out) throw Error(Errc::kIoError, "write failed: " + spec.log.string());
        if (options.on_record) options.on_record(r);
        fresh.push_back(std::move(r));
      } catch (...) {
        std::lock_guard lock(write_mutex);
        if (!fatal) fatal = std::current_exception();
        next = pending.size();
        return;
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(spec.backend.max_in_flight),
                                                    std::max<std::size_t>(pending.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  summary.attempted = fresh.size();
  if (fatal) std::rethrow_exception(fatal);

  std::set<std::string> wanted;
  for (const auto& p : problems) wanted.insert(p.id);
  auto tally = [&](const EvalRecord& r) {
    if (r.condition != cond || r.model != spec.backend.model || !wanted.erase(r.problem_id)) return;
    ++summary.completed;
    summary.correct += r.correct;
    summary.parse_failures += r.status == RecordStatus::kParseFailure;
    summary.transport_failures += r.status == RecordStatus::kTransportFailure;
  };
  for (const auto& r : existing) tally(r);
  for (const auto& r : fresh) tally(r);
  summary.accuracy = summary.completed ? 100.0 * static_cast<double>(summary.correct) / static_cast<double>(summary.completed) : 0.0;
  return summary;
}

}  // namespace cg
