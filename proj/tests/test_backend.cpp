#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "cg/backend.hpp"
#include "cg/describe.hpp"
#include "cg/hash.hpp"
#include "cg/response.hpp"
#include "support.hpp"

using namespace cg;
using nlohmann::json;

namespace {

BongardProblem fixture(const char* id = "bd_right_triangle_band_0000", QueryPolicy policy = QueryPolicy::kHeldOutPos) {
  const Corpus corpus = Corpus::load(cgtest::source_dir() / "data/fixtures/corpus");
  return select_query(corpus.at(id), policy, 0);
}

json openai_reply(const std::string& text) {
  return {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}})}};
}

// Scripted fake: returns queued statuses first, then a 200 with a canned answer.
class FakeTransport : public Transport {
 public:
  std::vector<int> statuses;  // consumed front to back
  std::vector<HttpRequest> seen;
  std::atomic<int> in_flight{0}, max_seen{0}, calls{0};
  int delay_ms = 0;
  bool throw_timeout = false;

  HttpResponse post(const HttpRequest& r) override {
    const int now = ++in_flight;
    int prev = max_seen.load();
    while (now > prev && !max_seen.compare_exchange_weak(prev, now)) {
    }
    ++calls;
    if (delay_ms) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    int status = 200;
    {
      std::lock_guard lock(mu_);
      seen.push_back(r);
      if (!statuses.empty()) {
        status = statuses.front();
        statuses.erase(statuses.begin());
      }
    }
    --in_flight;
    if (status == -1) throw Error(Errc::kTimeout, "fake timeout");
    if (status != 200) return {status, "{\"error\": \"x\"}"};
    return {200, openai_reply(R"({"Analysis":"a","Rule":"r","Test Image":"t","Conclusion":"neg"})").dump()};
  }

 private:
  std::mutex mu_;
};

BackendConfig openai_config() {
  BackendConfig c;
  c.kind = BackendKind::kOpenAI;
  c.endpoint = "http://localhost:11434";
  c.model = "fake-model";
  c.backoff_base_ms = 1;
  c.backoff_cap_ms = 2;
  return c;
}

std::set<std::string> token_set(const BongardImage& img, Representation r) {
  std::set<std::string> out;
  if (r == Representation::kAP) {
    for (const auto& shape : serialize_image(img)) out.insert(shape.begin(), shape.end());
  } else {
    const auto d = render_description(img);
    for (std::size_t i = 1; i + 1 < d.lines.size(); ++i) out.insert(d.lines[i].substr(d.lines[i].find(": ") + 2));
  }
  return out;
}

// Straightforward recomputation of the nearest-class rule.
Label brute_force(const BongardProblem& p, Representation r) {
  const auto q = token_set(p.query, r);
  auto mean = [&](const std::vector<BongardImage>& images) {
    double total = 0;
    for (const auto& img : images) {
      const auto s = token_set(img, r);
      std::size_t inter = 0;
      for (const auto& t : s) inter += q.count(t);
      const std::size_t uni = s.size() + q.size() - inter;
      total += uni ? double(inter) / double(uni) : 0.0;
    }
    return total / double(images.size());
  };
  return mean(p.positives) > mean(p.negatives) ? Label::kPos : Label::kNeg;
}

}  // namespace

TEST_CASE("config validation") {
  BackendConfig c;
  CHECK_THROWS_AS(c.validate(), Error);
  c.model = "m";
  CHECK_NOTHROW(c.validate());
  CHECK(c.decoding.temperature == 0.0);
  c.max_in_flight = 0;
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kConfigError);
  }
  auto h = openai_config();
  h.endpoint = "localhost";
  CHECK_THROWS_AS(h.validate(), Error);
  h = openai_config();
  h.kind = BackendKind::kGemini;
  CHECK_THROWS_AS(h.validate(), Error);
  for (auto k : {BackendKind::kOpenAI, BackendKind::kGemini, BackendKind::kReference}) {
    CHECK(parse_backend_kind(backend_kind_name(k)) == k);
  }
}

TEST_CASE("reference classifier rules") {
  auto p = fixture();
  p.query = p.positives[0];
  for (auto& img : p.negatives) img = parse_image({{"line_circle_0.999-0.001"}});
  CHECK(reference_classify(p).verdict == Label::kPos);

  p = fixture();
  p.query = parse_image({{"arc_wavy_0.001_0.001-0.001"}});
  const auto tie = reference_classify(p);
  CHECK(tie.pos_score == 0.0);
  CHECK(tie.neg_score == 0.0);
  CHECK(tie.verdict == Label::kNeg);
}

TEST_CASE("reference classifier agrees with a brute-force recomputation") {
  const Corpus corpus = Corpus::load(cgtest::source_dir() / "data/fixtures/corpus");
  for (const auto& raw : corpus.problems()) {
    for (auto policy : {QueryPolicy::kHeldOutPos, QueryPolicy::kHeldOutNeg}) {
      const auto p = select_query(raw, policy, 0);
      for (auto r : {Representation::kAP, Representation::kAD}) {
        CAPTURE(raw.id);
        CHECK(reference_classify(p, r).verdict == brute_force(p, r));
        CHECK(reference_classify(p, r).verdict == reference_classify(p, r).verdict);
      }
      const auto ap = parse_user_prompt(build_user_prompt(p, Condition::parse("ap")));
      CHECK(reference_classify(ap).verdict == reference_classify(p, Representation::kAP).verdict);
      CHECK(reference_classify(ap).pos_score == doctest::Approx(reference_classify(p).pos_score));
    }
  }
}

TEST_CASE("reference backend answers with the schema") {
  BackendConfig c;
  c.model = "reference";
  Backend b(c);
  const auto p = fixture();
  for (const char* spec : {"ap", "ad", "ap,concept", "ad,minimal"}) {
    const auto bundle = build_bundle(p, Condition::parse(spec));
    const auto raw = b.complete(bundle);
    const auto parsed = extract_answer(raw.text);
    REQUIRE(std::holds_alternative<ParsedAnswer>(parsed));
    CHECK(std::get<ParsedAnswer>(parsed).conclusion ==
          reference_classify(p, bundle.user.find("To draw figure") != std::string::npos ? Representation::kAD
                                                                                      : Representation::kAP)
              .verdict);
  }
  for (const char* spec : {"ap,grounded", "image"}) {
    try {
      b.complete(build_bundle(p, Condition::parse(spec)));
      FAIL("expected UnsupportedModality");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::kUnsupportedModality);
    }
  }
}

TEST_CASE("openai wire format") {
  auto fake = std::make_shared<FakeTransport>();
  auto cfg = openai_config();
  cfg.multimodal = true;
  Backend b(cfg, {}, fake);
  const auto p = fixture();
  auto bundle = build_bundle(p, Condition::parse("ap,grounded"));
  const auto req = b.build_request(bundle);
  CHECK(req.url == "http://localhost:11434/v1/chat/completions");
  const auto body = json::parse(req.body);
  CHECK(body["model"] == "fake-model");
  CHECK(body["temperature"] == 0.0);
  CHECK(body["stream"] == false);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][0]["content"] == bundle.system);
  const auto& content = body["messages"][1]["content"];
  REQUIRE(content.is_array());
  CHECK(content[0]["text"] == bundle.user);
  const std::string url = content[1]["image_url"]["url"];
  CHECK(url == "data:image/png;base64," + base64_encode(cgtest::slurp(p.query_file)));

  const auto raw = b.complete(bundle);
  CHECK(raw.http_status == 200);
  CHECK(raw.text.find("\"Conclusion\":\"neg\"") != std::string::npos);
  CHECK(b.read_completion(openai_reply("hi").dump()) == "hi");
  CHECK_THROWS_AS(b.read_completion("{}"), Error);
}

TEST_CASE("gemini wire format and auth") {
  auto fake = std::make_shared<FakeTransport>();
  BackendConfig cfg = openai_config();
  cfg.kind = BackendKind::kGemini;
  cfg.endpoint = "https://example.invalid";
  cfg.model = "gem";
  cfg.api_key_env = "CG_TEST_UNSET_KEY_VARIABLE";
  ::unsetenv("CG_TEST_UNSET_KEY_VARIABLE");
  Backend b(cfg, {}, fake);
  const auto bundle = build_bundle(fixture(), Condition::parse("ap"));
  try {
    b.build_request(bundle);
    FAIL("expected AuthMissing");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kAuthMissing);
  }
  ::setenv("CG_TEST_UNSET_KEY_VARIABLE", "secret", 1);
  const auto req = b.build_request(bundle);
  CHECK(req.url == "https://example.invalid/v1beta/models/gem:generateContent");
  bool has_key = false;
  for (const auto& [k, v] : req.headers) has_key |= k == "x-goog-api-key" && v == "secret";
  CHECK(has_key);
  const auto body = json::parse(req.body);
  CHECK(body["systemInstruction"]["parts"][0]["text"] == bundle.system);
  CHECK(body["contents"][0]["parts"][0]["text"] == bundle.user);
  CHECK(body["generationConfig"]["temperature"] == 0.0);
  const json reply = {{"candidates", json::array({{{"content", {{"parts", json::array({{{"text", "ab"}}, {{"text", "c"}}})}}}}})}};
  CHECK(b.read_completion(reply.dump()) == "abc");
  ::unsetenv("CG_TEST_UNSET_KEY_VARIABLE");
}

TEST_CASE("retries are byte-identical and bounded") {
  auto fake = std::make_shared<FakeTransport>();
  fake->statuses = {429, 503, -1};
  auto cfg = openai_config();
  cfg.max_retries = 4;
  Backend b(cfg, {}, fake);
  const auto raw = b.complete(build_bundle(fixture(), Condition::parse("ad")));
  CHECK(raw.retries == 3);
  REQUIRE(fake->seen.size() == 4);
  for (const auto& r : fake->seen) CHECK(r.body == fake->seen[0].body);

  fake->seen.clear();
  fake->statuses = {429, 429, 429};
  cfg.max_retries = 2;
  Backend limited(cfg, {}, fake);
  try {
    limited.complete(build_bundle(fixture(), Condition::parse("ap")));
    FAIL("expected RateLimited");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kRateLimited);
  }
  CHECK(fake->seen.size() == 3);

  fake->statuses = {401};
  try {
    limited.complete(build_bundle(fixture(), Condition::parse("ap")));
    FAIL("expected AuthMissing");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kAuthMissing);
  }
  fake->statuses = {400};
  CHECK_THROWS_AS(limited.complete(build_bundle(fixture(), Condition::parse("ap"))), Error);
}

TEST_CASE("in-flight limit holds under concurrency") {
  auto fake = std::make_shared<FakeTransport>();
  fake->delay_ms = 5;
  auto cfg = openai_config();
  cfg.max_in_flight = 3;
  Backend b(cfg, {}, fake);
  const auto bundle = build_bundle(fixture(), Condition::parse("ap"));
  std::vector<std::thread> threads;
  for (int i = 0; i < 12; ++i) threads.emplace_back([&] { b.complete(bundle); });
  for (auto& t : threads) t.join();
  CHECK(fake->calls == 12);
  CHECK(fake->max_seen <= 3);
  CHECK(fake->max_seen >= 2);
}

TEST_CASE("disk cache") {
  const auto dir = cgtest::scratch("cache");
  auto fake = std::make_shared<FakeTransport>();
  Backend b(openai_config(), dir, fake);
  const auto bundle = build_bundle(fixture(), Condition::parse("ap"));
  const auto first = b.complete(bundle);
  const auto second = b.complete(bundle);
  CHECK_FALSE(first.from_cache);
  CHECK(second.from_cache);
  CHECK(second.text == first.text);
  CHECK(fake->calls == 1);
  CHECK(std::filesystem::exists(dir / (b.cache_key(bundle) + ".json")));

  auto other = bundle;
  other.user += " ";
  CHECK(b.cache_key(other) != b.cache_key(bundle));
  b.set_cache_bypass(true);
  b.complete(bundle);
  CHECK(fake->calls == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("text-only http backend rejects images") {
  auto fake = std::make_shared<FakeTransport>();
  Backend b(openai_config(), {}, fake);
  try {
    b.complete(build_bundle(fixture(), Condition::parse("ad,grounded")));
    FAIL("expected UnsupportedModality");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kUnsupportedModality);
  }
  CHECK(fake->calls == 0);
}

TEST_CASE("unreachable endpoint surfaces a transport error") {
  auto cfg = openai_config();
  cfg.endpoint = "http://127.0.0.1:9";
  cfg.max_retries = 1;
  cfg.timeout_seconds = 2;
  Backend b(cfg);
  try {
    b.complete(build_bundle(fixture(), Condition::parse("ap")));
    FAIL("expected TransportError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kTransportError);
  }
}
