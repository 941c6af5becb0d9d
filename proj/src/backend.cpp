#include "cg/backend.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "cg/describe.hpp"
#include "cg/hash.hpp"
#include "cg/response.hpp"
#include "json_io.hpp"

namespace cg {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string trim_slash(std::string s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
  return s;
}

using TokenSet = std::set<std::string>;

TokenSet token_set(const BongardImage& img, Representation rep) {
  TokenSet out;
  if (rep == Representation::kAD) {
    const auto desc = render_description(img, 1);
    // Lines between header and footer are steps; drop the "Step k: " prefix.
    for (std::size_t i = 1; i + 1 < desc.lines.size(); ++i) {
      const auto& line = desc.lines[i];
      const auto colon = line.find(": ");
      out.insert(colon == std::string::npos ? line : line.substr(colon + 2));
    }
    return out;
  }
  for (const auto& shape : serialize_image(img)) out.insert(shape.begin(), shape.end());
  return out;
}

double jaccard(const TokenSet& a, const TokenSet& b) {
  std::size_t common = 0;
  for (const auto& t : a) common += b.count(t);
  const std::size_t unite = a.size() + b.size() - common;
  return unite == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(unite);
}

ReferenceVerdict classify(const std::vector<BongardImage>& pos, const std::vector<BongardImage>& neg,
                          const BongardImage& query, Representation rep) {
  const TokenSet q = token_set(query, rep);
  auto mean = [&](const std::vector<BongardImage>& images) {
    double sum = 0.0;
    for (const auto& img : images) sum += jaccard(q, token_set(img, rep));
    return images.empty() ? 0.0 : sum / static_cast<double>(images.size());
  };
  ReferenceVerdict v;
  v.pos_score = mean(pos);
  v.neg_score = mean(neg);
  v.verdict = v.pos_score > v.neg_score ? Label::kPos : Label::kNeg;
  return v;
}

std::string digest_file(const fs::path& p) { return sha256_hex(detail::read_text(p)); }

class Slot {
 public:
  explicit Slot(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~Slot() { s_.release(); }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

std::string_view backend_kind_name(BackendKind k) {
  switch (k) {
    case BackendKind::kOpenAI: return "http-openai-style";
    case BackendKind::kGemini: return "http-gemini-style";
    case BackendKind::kReference: return "reference";
  }
  return "?";
}

std::optional<BackendKind> parse_backend_kind(std::string_view name) {
  for (auto k : {BackendKind::kOpenAI, BackendKind::kGemini, BackendKind::kReference}) {
    if (backend_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

void BackendConfig::validate() const {
  if (max_in_flight < 1 || max_in_flight > 1024) throw Error(Errc::kConfigError, "max_in_flight must be in [1, 1024]");
  if (max_retries < 0) throw Error(Errc::kConfigError, "max_retries must be >= 0");
  if (timeout_seconds <= 0) throw Error(Errc::kConfigError, "timeout_seconds must be positive");
  if (decoding.max_output_tokens < 1) throw Error(Errc::kConfigError, "max_output_tokens must be positive");
  if (decoding.temperature < 0) throw Error(Errc::kConfigError, "temperature must be >= 0");
  if (backoff_base_ms < 0 || backoff_cap_ms < backoff_base_ms) throw Error(Errc::kConfigError, "bad backoff bounds");
  if (model.empty()) throw Error(Errc::kConfigError, "model id is required");
  if (kind != BackendKind::kReference) {
    if (endpoint.empty()) throw Error(Errc::kConfigError, "endpoint is required for HTTP backends");
    if (!endpoint.starts_with("http://") && !endpoint.starts_with("https://")) {
      throw Error(Errc::kConfigError, "endpoint must be an http:// or https:// URL");
    }
  }
  if (kind == BackendKind::kGemini && api_key_env.empty()) {
    throw Error(Errc::kConfigError, "the gemini-style backend needs api_key_env");
  }
}

Backend::Backend(BackendConfig config, fs::path cache_dir, std::shared_ptr<Transport> transport)
    : config_(std::move(config)),
      cache_dir_(std::move(cache_dir)),
      transport_(std::move(transport)),
      slots_(std::clamp(config_.max_in_flight, 1, 1024)) {
  config_.validate();
  if (!transport_ && config_.kind != BackendKind::kReference) transport_ = make_http_transport();
}

std::string Backend::cache_key(const PromptBundle& bundle) const {
  std::string material = std::string(backend_kind_name(config_.kind));
  material += '\0' + config_.model + '\0' + bundle.system + '\0' + bundle.user;
  for (const auto& img : bundle.images) material += '\0' + digest_file(img.path);
  return sha256_hex(material);
}

HttpRequest Backend::build_request(const PromptBundle& bundle) const {
  HttpRequest req;
  req.timeout_seconds = config_.timeout_seconds;
  req.headers.emplace_back("Content-Type", "application/json");
  std::string key;
  if (!config_.api_key_env.empty()) {
    const char* v = std::getenv(config_.api_key_env.c_str());
    if (!v || !*v) throw Error(Errc::kAuthMissing, "environment variable " + config_.api_key_env + " is not set");
    key = v;
  }
  std::vector<std::string> encoded;
  for (const auto& img : bundle.images) encoded.push_back(base64_encode(detail::read_text(img.path)));

  json body;
  if (config_.kind == BackendKind::kGemini) {
    req.url = trim_slash(config_.endpoint) + "/v1beta/models/" + config_.model + ":generateContent";
    if (!key.empty()) req.headers.emplace_back("x-goog-api-key", key);
    json parts = json::array({{{"text", bundle.user}}});
    for (std::size_t i = 0; i < encoded.size(); ++i) {
      parts.push_back({{"inline_data", {{"mime_type", bundle.images[i].mime_type}, {"data", encoded[i]}}}});
    }
    body["systemInstruction"] = {{"parts", json::array({{{"text", bundle.system}}})}};
    body["contents"] = json::array({{{"role", "user"}, {"parts", std::move(parts)}}});
    body["generationConfig"] = {{"temperature", config_.decoding.temperature},
                                {"maxOutputTokens", config_.decoding.max_output_tokens},
                                {"candidateCount", 1}};
  } else {
    req.url = trim_slash(config_.endpoint) + "/v1/chat/completions";
    if (!key.empty()) req.headers.emplace_back("Authorization", "Bearer " + key);
    json user_content;
    if (encoded.empty()) {
      user_content = bundle.user;
    } else {
      user_content = json::array({{{"type", "text"}, {"text", bundle.user}}});
      for (std::size_t i = 0; i < encoded.size(); ++i) {
        const std::string uri = "data:" + bundle.images[i].mime_type + ";base64," + encoded[i];
        user_content.push_back({{"type", "image_url"}, {"image_url", {{"url", uri}}}});
      }
    }
    body["model"] = config_.model;
    body["messages"] = json::array({{{"role", "system"}, {"content", bundle.system}},
                                    {{"role", "user"}, {"content", std::move(user_content)}}});
    body["temperature"] = config_.decoding.temperature;
    body["max_tokens"] = config_.decoding.max_output_tokens;
    body["stream"] = false;
  }
  req.body = body.dump();
  return req;
}

std::string Backend::read_completion(const std::string& body) const {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::kTransportError, "response body is not a JSON object");
  try {
    if (config_.kind == BackendKind::kGemini) {
      std::string text;
      for (const auto& part : j.at("candidates").at(0).at("content").at("parts")) {
        if (part.contains("text")) text += part["text"].get<std::string>();
      }
      return text;
    }
    const json& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string text;
    for (const auto& part : content) {
      if (part.contains("text")) text += part["text"].get<std::string>();
    }
    return text;
  } catch (const json::exception& e) {
    throw Error(Errc::kTransportError, std::string("unexpected response shape: ") + e.what());
  }
}

std::optional<RawAnswer> Backend::cache_get(const std::string& key) const {
  if (cache_dir_.empty() || cache_bypass_) return std::nullopt;
  const fs::path file = cache_dir_ / (key + ".json");
  if (!fs::exists(file)) return std::nullopt;
  const json j = json::parse(detail::read_text(file), nullptr, false);
  if (j.is_discarded() || !j.contains("text") || !j["text"].is_string()) return std::nullopt;
  RawAnswer a;
  a.text = j["text"].get<std::string>();
  a.http_status = j.value("http_status", 0);
  a.from_cache = true;
  return a;
}

void Backend::cache_put(const std::string& key, const RawAnswer& answer) const {
  if (cache_dir_.empty()) return;
  static std::atomic<unsigned long> counter{0};
  const json j{{"model", config_.model}, {"text", answer.text}, {"http_status", answer.http_status}};
  const fs::path file = cache_dir_ / (key + ".json");
  const fs::path tmp = cache_dir_ / (key + ".tmp" + std::to_string(counter++) + "-" +
                                     std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
  detail::write_text(tmp, j.dump() + "\n");
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::kIoError, "cannot publish cache entry " + file.string());
  }
}

RawAnswer Backend::call_http(const PromptBundle& bundle) {
  const HttpRequest req = build_request(bundle);
  for (int attempt = 0;; ++attempt) {
    std::optional<Error> failure;
    HttpResponse res;
    {
      Slot slot(slots_);
      try {
        res = transport_->post(req);
      } catch (const Error& e) {
        if (e.code() != Errc::kTimeout && e.code() != Errc::kTransportError) throw;
        failure.emplace(e);
      }
    }
    if (!failure) {
      if (res.status == 200) {
        RawAnswer a;
        a.text = read_completion(res.body);
        a.http_status = res.status;
        a.retries = attempt;
        return a;
      }
      const std::string what = "HTTP " + std::to_string(res.status) + " from " + req.url;
      if (res.status == 401 || res.status == 403) throw Error(Errc::kAuthMissing, what);
      if (!retryable_status(res.status)) throw Error(Errc::kTransportError, what + ": " + res.body.substr(0, 200));
      failure.emplace(res.status == 429 ? Errc::kRateLimited : Errc::kTransportError, what);
    }
    if (attempt >= config_.max_retries) throw *failure;
    const long long delay = std::min<long long>(config_.backoff_cap_ms,
                                                static_cast<long long>(config_.backoff_base_ms) << std::min(attempt, 30));
    std::this_thread::sleep_for(std::chrono::milliseconds(delay));
  }
}

RawAnswer Backend::complete(const PromptBundle& bundle) {
  const auto start = std::chrono::steady_clock::now();
  if (!bundle.images.empty() && (!config_.multimodal || config_.kind == BackendKind::kReference)) {
    throw Error(Errc::kUnsupportedModality, "backend '" + config_.model + "' does not accept images");
  }
  RawAnswer answer;
  if (config_.kind == BackendKind::kReference) {
    Slot slot(slots_);
    ParsedUserPrompt parsed;
    try {
      parsed = parse_user_prompt(bundle.user);
    } catch (const TemplateMismatch& e) {
      throw Error(Errc::kUnsupportedModality, std::string("reference backend needs a symbolic prompt: ") + e.what());
    }
    const ReferenceVerdict v = reference_classify(parsed);
    ParsedAnswer a;
    char buf[96];
    std::snprintf(buf, sizeof buf, "mean Jaccard similarity: positives %.4f, negatives %.4f", v.pos_score,
                  v.neg_score);
    a.analysis = buf;
    a.rule = "query joins the class whose action tokens it shares most";
    a.test_image = v.verdict == Label::kPos ? "closer to the positive set" : "not closer to the positive set";
    a.conclusion = v.verdict;
    answer.text = serialize_answer(a);
    answer.http_status = 200;
  } else {
    const std::string key = cache_key(bundle);
    if (auto hit = cache_get(key)) {
      answer = std::move(*hit);
    } else {
      answer = call_http(bundle);
      cache_put(key, answer);
    }
  }
  answer.latency_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return answer;
}

ReferenceVerdict reference_classify(const BongardProblem& p, Representation representation) {
  const Representation rep = representation == Representation::kAD ? Representation::kAD : Representation::kAP;
  return classify(p.positives, p.negatives, p.query, rep);
}

ReferenceVerdict reference_classify(const ParsedUserPrompt& prompt) {
  return classify(prompt.positives, prompt.negatives, prompt.query, prompt.representation);
}

}  // namespace cg
