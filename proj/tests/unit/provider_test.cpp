#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <json.hpp>
#include <mutex>
#include <thread>
#include <unistd.h>

#include "fixtures.hpp"
#include "sxcad/error.hpp"
#include "sxcad/hash.hpp"
#include "sxcad/provider.hpp"

namespace sxcad {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Scripted transport: pops one response (or network failure) per call.
class FakeTransport final : public HttpTransport {
 public:
  struct Step {
    int status = 200;
    std::string body;
    bool network_error = false;
  };

  explicit FakeTransport(std::deque<Step> steps) : steps_(std::move(steps)) {}
  FakeTransport(std::deque<Step> steps, Step fallback) : steps_(std::move(steps)), fallback_(std::move(fallback)) {}

  HttpResponse post(const HttpRequest& request) override {
    Step step;
    {
      std::lock_guard lock(mutex_);
      ++calls_;
      requests_.push_back(request);
      step = steps_.empty() ? fallback_ : steps_.front();
      if (!steps_.empty()) steps_.pop_front();
    }
    const int now = ++in_flight_;
    int seen = max_in_flight_.load();
    while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
    --in_flight_;
    if (step.network_error) throw TransportError("connection refused", {});
    return {step.status, step.body};
  }

  int calls() const { return calls_; }
  int max_in_flight() const { return max_in_flight_; }
  std::vector<HttpRequest> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }
  int delay_ms_ = 0;

 private:
  mutable std::mutex mutex_;
  std::deque<Step> steps_;
  Step fallback_;
  std::vector<HttpRequest> requests_;
  int calls_ = 0;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

std::string chat_body(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sxcad_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

class HttpVlm : public ::testing::Test {
 protected:
  void SetUp() override {
    ::setenv("SXCAD_TEST_KEY", "secret", 1);
    image = dir.path / "chair.png";
    std::ofstream(image, std::ios::binary) << "\x89PNG fake image bytes";
  }
  void TearDown() override { ::unsetenv("SXCAD_TEST_KEY"); }

  HttpVlmOptions options() const {
    HttpVlmOptions o;
    o.endpoint = "http://127.0.0.1:9/v1/chat/completions";
    o.api_key_env = "SXCAD_TEST_KEY";
    o.initial_backoff = std::chrono::milliseconds(0);
    o.cache_dir = dir.path / "cache";
    return o;
  }

  TempDir dir;
  fs::path image;
};

TEST(Prompts, MatchShippedAssets) {
  const PromptSections s = prompt_sections();
  EXPECT_EQ(s.basic, test::read_file(test::prompt_dir() / "basic.txt"));
  EXPECT_EQ(s.context_example, test::read_file(test::prompt_dir() / "context_example.txt"));
  EXPECT_EQ(s.reminder, test::read_file(test::prompt_dir() / "reminder.txt"));
  EXPECT_EQ(s.cot, test::read_file(test::prompt_dir() / "cot.txt"));
  EXPECT_EQ(prompt_text(PromptTemplate::Cot), test::read_file(test::prompt_dir() / "full.txt"));
}

TEST(Prompts, TemplatesNest) {
  const std::string base = prompt_text(PromptTemplate::Base);
  const std::string reminder = prompt_text(PromptTemplate::Reminder);
  const std::string context = prompt_text(PromptTemplate::ContextExample);
  const std::string cot = prompt_text(PromptTemplate::Cot);
  EXPECT_EQ(base, std::string(prompt_sections().basic));
  EXPECT_EQ(reminder.rfind(base, 0), 0u);
  EXPECT_EQ(context.rfind(base, 0), 0u);
  EXPECT_EQ(cot.rfind(context, 0), 0u);
  EXPECT_NE(context.find(prompt_sections().reminder), std::string::npos);
  EXPECT_LT(base.size(), reminder.size());
  EXPECT_LT(reminder.size(), context.size());
  EXPECT_LT(context.size(), cot.size());
}

TEST(Prompts, TemplateIds) {
  for (PromptTemplate t : {PromptTemplate::Base, PromptTemplate::Reminder, PromptTemplate::ContextExample, PromptTemplate::Cot}) {
    EXPECT_EQ(prompt_template_from_string(to_string(t)), t);
  }
  EXPECT_EQ(prompt_template_from_string("+cot"), PromptTemplate::Cot);
  EXPECT_FALSE(prompt_template_from_string("fancy"));
}

TEST(FixtureProvider, ServesBackrestDemo) {
  const auto p = fixture_provider(test::data_dir() / "fixtures");
  const std::string a = p->request("backrest_demo", PromptTemplate::Cot);
  EXPECT_EQ(a, test::read_file(test::data_dir() / "backrest.cad"));
  EXPECT_EQ(p->request("backrest_demo", PromptTemplate::Base), a);
  EXPECT_THROW(p->request("no_such_key", PromptTemplate::Cot), ProviderError);
  EXPECT_THROW(p->request("../backrest", PromptTemplate::Cot), ProviderError);
  EXPECT_THROW(fixture_provider(test::data_dir() / "missing"), ConfigError);
}

TEST_F(HttpVlm, MissingKeyFailsBeforeNetwork) {
  auto transport = std::make_shared<FakeTransport>(std::deque<FakeTransport::Step>{});
  HttpVlmOptions o = options();
  o.api_key_env = "SXCAD_TEST_KEY_UNSET";
  EXPECT_THROW(http_vlm_provider(o, transport), ConfigError);
  EXPECT_EQ(transport->calls(), 0);
}

TEST_F(HttpVlm, SendsChatRequestAndCaches) {
  auto transport = std::make_shared<FakeTransport>(std::deque<FakeTransport::Step>{{200, chat_body("<SOL>...")}});
  HttpVlmOptions o = options();
  o.temperature = 0.2;
  const auto p = http_vlm_provider(o, transport);
  EXPECT_EQ(p->request(image.string(), PromptTemplate::Cot), "<SOL>...");
  EXPECT_EQ(p->request(image.string(), PromptTemplate::Cot), "<SOL>...");
  EXPECT_EQ(transport->calls(), 1);

  const HttpRequest req = transport->requests().at(0);
  EXPECT_EQ(req.headers.at("Authorization"), "Bearer secret");
  const json body = json::parse(req.body);
  EXPECT_EQ(body["model"], o.model);
  EXPECT_EQ(body["temperature"], 0.2);
  const json& content = body["messages"][0]["content"];
  EXPECT_EQ(content[0]["text"], prompt_text(PromptTemplate::Cot));
  const std::string bytes = test::read_file(image);
  EXPECT_EQ(content[1]["image_url"]["url"], "data:image/png;base64," + base64_encode(bytes));

  const fs::path cached = o.cache_dir / (response_cache_key(bytes, PromptTemplate::Cot) + ".txt");
  EXPECT_EQ(test::read_file(cached), "<SOL>...");

  // A new provider instance reads the cache without any call.
  const auto again = http_vlm_provider(o, transport);
  EXPECT_EQ(again->request(image.string(), PromptTemplate::Cot), "<SOL>...");
  EXPECT_EQ(transport->calls(), 1);
}

TEST_F(HttpVlm, CacheKeyDependsOnTemplateAndImage) {
  EXPECT_NE(response_cache_key("abc", PromptTemplate::Cot), response_cache_key("abc", PromptTemplate::Base));
  EXPECT_NE(response_cache_key("abc", PromptTemplate::Cot), response_cache_key("abd", PromptTemplate::Cot));
  EXPECT_EQ(response_cache_key("abc", PromptTemplate::Cot).size(), 64u);
}

TEST_F(HttpVlm, RetriesTransientFailures) {
  auto transport = std::make_shared<FakeTransport>(std::deque<FakeTransport::Step>{
      {429, "slow down"}, {0, "", true}, {200, chat_body("ok")}});
  const auto p = http_vlm_provider(options(), transport);
  EXPECT_EQ(p->request(image.string(), PromptTemplate::Base), "ok");
  EXPECT_EQ(transport->calls(), 3);
}

TEST_F(HttpVlm, ThreeFailuresRaiseTransportError) {
  auto transport = std::make_shared<FakeTransport>(
      std::deque<FakeTransport::Step>{{503, ""}, {0, "", true}, {500, ""}, {200, chat_body("late")}});
  const auto p = http_vlm_provider(options(), transport);
  try {
    (void)p->request(image.string(), PromptTemplate::Base);
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    ASSERT_EQ(e.attempts().size(), 3u);
    EXPECT_NE(e.attempts()[0].find("503"), std::string::npos);
    EXPECT_NE(e.attempts()[1].find("connection refused"), std::string::npos);
    EXPECT_NE(e.attempts()[2].find("500"), std::string::npos);
  }
  EXPECT_EQ(transport->calls(), 3);
}

TEST_F(HttpVlm, ClientErrorsAreNotRetried) {
  auto transport = std::make_shared<FakeTransport>(std::deque<FakeTransport::Step>{{401, "bad key"}});
  const auto p = http_vlm_provider(options(), transport);
  EXPECT_THROW(p->request(image.string(), PromptTemplate::Base), TransportError);
  EXPECT_EQ(transport->calls(), 1);
}

TEST_F(HttpVlm, MalformedResponseIsProviderError) {
  auto transport = std::make_shared<FakeTransport>(std::deque<FakeTransport::Step>{{200, "{\"choices\": []}"}});
  const auto p = http_vlm_provider(options(), transport);
  EXPECT_THROW(p->request(image.string(), PromptTemplate::Base), ProviderError);
}

TEST_F(HttpVlm, BoundsRequestsInFlight) {
  auto transport = std::make_shared<FakeTransport>(std::deque<FakeTransport::Step>{}, FakeTransport::Step{200, chat_body("x")});
  transport->delay_ms_ = 20;
  HttpVlmOptions o = options();
  o.cache_dir.clear();
  o.max_in_flight = 2;
  const auto p = http_vlm_provider(o, transport);
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) threads.emplace_back([&] { (void)p->request(image.string(), PromptTemplate::Base); });
  for (auto& t : threads) t.join();
  EXPECT_EQ(transport->calls(), 6);
  EXPECT_LE(transport->max_in_flight(), 2);
}

TEST(StubEmbedder, Properties) {
  const auto emb = stub_embedder();
  EXPECT_EQ(emb->dim(), 512u);
  EXPECT_EQ(emb->embed("leg"), emb->embed("leg"));
  EXPECT_EQ(emb->embed("Leg"), emb->embed("leg"));
  for (const char* word : {"seat", "backrest", "leg 1", "leg 2", "tabletop", "", "  "}) {
    double n = 0;
    for (double x : emb->embed(word)) n += x * x;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-6);
  }
  EXPECT_GT(cosine_similarity(emb->embed("leg 1"), emb->embed("leg 2")),
            cosine_similarity(emb->embed("leg 1"), emb->embed("tabletop")));
  EXPECT_NE(stub_embedder(1)->embed("leg"), emb->embed("leg"));
}

TEST(StubEmbedder, SharedTokensBeatDisjointOnesOverVocabulary) {
  const auto emb = stub_embedder();
  const std::vector<std::string> vocab{"leg 1", "leg 2", "leg 3", "leg 4", "seat", "backrest", "tabletop", "armrest"};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      for (int k = 4; k < 8; ++k) {
        EXPECT_GT(cosine_similarity(emb->embed(vocab[i]), emb->embed(vocab[j])),
                  cosine_similarity(emb->embed(vocab[i]), emb->embed(vocab[k])));
      }
    }
  }
}

TEST(RetrieveSemantics, Examples) {
  const auto emb = stub_embedder();
  EXPECT_EQ(retrieve_semantics("seat", {"leg", "seat"}, *emb), "seat");
  const auto golden = json::parse(test::read_file(test::data_dir() / "golden" / "stub_embedder.json"));
  const json& r = golden.at("retrieve");
  EXPECT_EQ(retrieve_semantics(r["label"].get<std::string>(), r["vocabulary"].get<std::vector<std::string>>(), *emb),
            r["answer"].get<std::string>());
  EXPECT_THROW(retrieve_semantics("", {"leg"}, *emb), InvariantError);
  EXPECT_THROW(retrieve_semantics("leg", {}, *emb), InvariantError);
}

TEST(HttpEmbedder, MemoizesAndNormalizes) {
  json body{{"data", json::array({{{"embedding", {3.0, 4.0}}}})}};
  auto transport = std::make_shared<FakeTransport>(std::deque<FakeTransport::Step>{{200, body.dump()}});
  HttpEmbeddingOptions o;
  o.endpoint = "http://127.0.0.1:9/v1/embeddings";
  o.dim = 2;
  const auto emb = http_embedder(o, transport);
  EXPECT_EQ(emb->embed("leg"), (std::vector<double>{0.6, 0.8}));
  EXPECT_EQ(emb->embed("leg"), (std::vector<double>{0.6, 0.8}));
  EXPECT_EQ(transport->calls(), 1);
}

TEST(HttpEmbedder, DimensionMismatch) {
  json body{{"data", json::array({{{"embedding", {1.0, 0.0, 0.0}}}})}};
  auto transport = std::make_shared<FakeTransport>(std::deque<FakeTransport::Step>{{200, body.dump()}});
  HttpEmbeddingOptions o;
  o.endpoint = "http://127.0.0.1:9/v1/embeddings";
  o.dim = 2;
  EXPECT_THROW(http_embedder(o, transport)->embed("x"), ProviderError);
}

}  // namespace
}  // namespace sxcad
