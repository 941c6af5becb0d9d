#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cg/backend.hpp"
#include "cg/dataset.hpp"
#include "cg/prompt.hpp"

namespace cg {

enum class RecordStatus { kOk, kParseFailure, kTransportFailure };
std::string_view record_status_name(RecordStatus s);  // "ok", "parse_failure", "transport_failure"
std::optional<RecordStatus> parse_record_status(std::string_view name);

// One scored problem. correct is false whenever predicted is empty.
struct EvalRecord {
  std::string problem_id;
  Split split = Split::kFF;
  std::string condition;  // canonical condition spec
  std::string model;
  std::uint64_t seed = 0;
  std::optional<Label> predicted;
  RecordStatus status = RecordStatus::kOk;
  Label gold = Label::kPos;
  bool correct = false;
  double latency_seconds = 0.0;
  std::string raw_sha256;
  std::string timestamp;  // UTC, ISO 8601
  std::string error;      // failure detail, empty when ok

  std::string to_json_line() const;  // single line, no trailing newline
  static EvalRecord from_json_line(std::string_view line);  // SchemaMismatch
};

// Reads a JSONL log. A final line without its newline (interrupted write) is ignored.
std::vector<EvalRecord> read_log(const std::filesystem::path& file);

struct RunSpec {
  std::filesystem::path corpus;
  std::filesystem::path manifest;
  std::filesystem::path log;
  std::filesystem::path cache_dir;  // empty = no response cache
  bool cache_bypass = false;
  Condition condition;
  BackendConfig backend;
  std::uint64_t seed = 0;

  // [run] and [backend] tables; relative paths resolve against base_dir. ConfigError.
  static RunSpec from_toml(std::string_view text, const std::filesystem::path& base_dir = {});
  static RunSpec load(const std::filesystem::path& file);
};

struct RunSummary {
  std::size_t attempted = 0;  // backend calls made by this run
  std::size_t skipped = 0;    // already present in the log
  std::size_t completed = 0;  // records in the log for this manifest, condition and model
  std::size_t parse_failures = 0;
  std::size_t transport_failures = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;  // percent over completed
};

struct RunOptions {
  std::shared_ptr<Transport> transport;  // null = real HTTP client
  std::function<void(const EvalRecord&)> on_record;
};

// Perturbs (if the condition asks for it), prompts, queries and scores every
// manifest problem not yet in the log, appending one record each.
RunSummary run(const RunSpec& spec, const RunOptions& options = {});

// Record for a single problem; the transport/parse outcome is folded into the record.
EvalRecord evaluate_problem(Backend& backend, const BongardProblem& problem, const Condition& condition,
                            std::uint64_t seed);

// The problem the model actually sees under a condition.
BongardProblem apply_perturbation(const BongardProblem& problem, const Condition& condition);

}  // namespace cg
