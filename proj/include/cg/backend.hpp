#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cg/dataset.hpp"
#include "cg/prompt.hpp"

namespace cg {

enum class BackendKind { kOpenAI, kGemini, kReference };
std::string_view backend_kind_name(BackendKind k);  // "http-openai-style", "http-gemini-style", "reference"
std::optional<BackendKind> parse_backend_kind(std::string_view name);

struct DecodingConfig {
  double temperature = 0.0;
  int max_output_tokens = 4096;
};

struct BackendConfig {
  BackendKind kind = BackendKind::kReference;
  std::string endpoint;     // e.g. http://localhost:11434 ; unused by the reference kind
  std::string model;
  std::string api_key_env;  // name of the environment variable holding the key; empty = none
  DecodingConfig decoding;
  double timeout_seconds = 300.0;
  int max_retries = 4;
  int max_in_flight = 1;
  bool multimodal = false;  // whether image attachments may be sent
  // Backoff before retry k (0-based) is min(backoff_cap_ms, backoff_base_ms * 2^k).
  int backoff_base_ms = 1000;
  int backoff_cap_ms = 60000;

  void validate() const;  // ConfigError
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  double timeout_seconds = 0.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Blocking POST. Implementations throw Error(kTimeout) or Error(kTransportError)
// when no HTTP response was obtained; any status code is returned as-is.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

std::shared_ptr<Transport> make_http_transport();

struct RawAnswer {
  std::string text;  // verbatim completion
  double latency_seconds = 0.0;
  int http_status = 0;
  int retries = 0;
  bool from_cache = false;
};

// Safe to call complete() from several threads; at most max_in_flight calls
// are inside the transport at once.
class Backend {
 public:
  // cache_dir empty = no cache. A null transport selects the real HTTP client.
  explicit Backend(BackendConfig config, std::filesystem::path cache_dir = {},
                   std::shared_ptr<Transport> transport = nullptr);

  RawAnswer complete(const PromptBundle& bundle);

  // Wire request for a bundle (exposed for inspection and tests). AuthMissing
  // if the configured key variable is unset.
  HttpRequest build_request(const PromptBundle& bundle) const;
  // Completion text out of a 200 response body; TransportError if malformed.
  std::string read_completion(const std::string& body) const;

  std::string cache_key(const PromptBundle& bundle) const;
  const BackendConfig& config() const noexcept { return config_; }
  void set_cache_bypass(bool bypass) noexcept { cache_bypass_ = bypass; }

 private:
  RawAnswer call_http(const PromptBundle& bundle);
  std::optional<RawAnswer> cache_get(const std::string& key) const;
  void cache_put(const std::string& key, const RawAnswer& answer) const;

  BackendConfig config_;
  std::filesystem::path cache_dir_;
  std::shared_ptr<Transport> transport_;
  std::counting_semaphore<1024> slots_;
  bool cache_bypass_ = false;
};

struct ReferenceVerdict {
  Label verdict = Label::kNeg;
  double pos_score = 0.0;  // mean Jaccard similarity to the positives
  double neg_score = 0.0;
};

// Token-set nearest-class rule: Jaccard similarity of the query's token set to
// each support image, averaged per class; higher mean wins, ties go to neg.
ReferenceVerdict reference_classify(const BongardProblem& p, Representation representation = Representation::kAP);

// Same rule over images recovered from a symbolic user prompt.
ReferenceVerdict reference_classify(const ParsedUserPrompt& prompt);

}  // namespace cg
