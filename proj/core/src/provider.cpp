#include "sxcad/provider.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <semaphore>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "sxcad/error.hpp"
#include "sxcad/hash.hpp"
#include "sxcad/rng.hpp"

namespace sxcad {

namespace prompt_assets {
extern const std::string_view basic;
extern const std::string_view context_example;
extern const std::string_view reminder;
extern const std::string_view cot;
}  // namespace prompt_assets

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProviderError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw ProviderError("cannot read " + path.string());
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
  std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw ProviderError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string require_env(const std::string& name) {
  const char* value = std::getenv(name.c_str());
  if (value == nullptr || *value == '\0') throw ConfigError("environment variable " + name + " is not set");
  return value;
}

class FixtureProvider final : public StructureProvider {
 public:
  explicit FixtureProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) throw ConfigError("fixture directory not found: " + dir_.string());
  }

  std::string request(const std::string& image, PromptTemplate) override {
    if (image.empty() || image.find('/') != std::string::npos || image.find('\\') != std::string::npos ||
        image == "." || image == "..") {
      throw ProviderError("invalid fixture key '" + image + "'");
    }
    const auto path = dir_ / (image + ".txt");
    if (!std::filesystem::is_regular_file(path)) throw ProviderError("unknown fixture key '" + image + "'");
    return read_file(path);
  }

 private:
  std::filesystem::path dir_;
};

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::milliseconds timeout) : timeout_(timeout) {}

  HttpResponse post(const HttpRequest& request) override {
    const SplitUrl url = split_url(request.url);
    httplib::Client client(url.base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), static_cast<time_t>(usecs.count()));
    client.set_read_timeout(secs.count(), static_cast<time_t>(usecs.count()));
    client.set_write_timeout(secs.count(), static_cast<time_t>(usecs.count()));
    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : request.headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        headers.emplace(k, v);
      }
    }
    auto res = client.Post(url.path, headers, request.body, content_type);
    if (!res) throw TransportError("POST " + request.url + ": " + httplib::to_string(res.error()), {});
    return {res->status, res->body};
  }

 private:
  std::chrono::milliseconds timeout_;
};

bool retryable_status(int status) { return status == 429 || status >= 500; }

/// POST with retries on network errors, 429 and 5xx.
std::string post_with_retries(HttpTransport& transport, const HttpRequest& request, int max_attempts,
                              std::chrono::milliseconds backoff) {
  std::vector<std::string> log;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    try {
      const HttpResponse res = transport.post(request);
      if (res.status >= 200 && res.status < 300) return res.body;
      log.push_back("attempt " + std::to_string(attempt) + ": HTTP " + std::to_string(res.status));
      if (!retryable_status(res.status)) {
        throw TransportError("request failed with HTTP " + std::to_string(res.status), std::move(log));
      }
    } catch (const TransportError& e) {
      if (e.attempts().empty()) {
        log.push_back("attempt " + std::to_string(attempt) + ": " + e.what());
      } else {
        throw;
      }
    }
    if (attempt < max_attempts) std::this_thread::sleep_for(backoff * (1 << (attempt - 1)));
  }
  throw TransportError("request failed after " + std::to_string(max_attempts) + " attempts", std::move(log));
}

std::string image_mime(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "image/png";
}

class HttpVlmProvider final : public StructureProvider {
 public:
  HttpVlmProvider(HttpVlmOptions options, std::shared_ptr<HttpTransport> transport)
      : options_(std::move(options)),
        api_key_(require_env(options_.api_key_env)),
        transport_(transport ? std::move(transport) : std::shared_ptr<HttpTransport>(default_http_transport())),
        slots_(std::clamp(options_.max_in_flight, 1, 64)) {
    if (options_.endpoint.empty()) throw ConfigError("VLM endpoint is empty");
    split_url(options_.endpoint);
    if (options_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  }

  std::string request(const std::string& image, PromptTemplate tmpl) override {
    const std::string bytes = read_file(image);
    const std::string key = response_cache_key(bytes, tmpl);
    const auto cached = options_.cache_dir.empty() ? std::filesystem::path() : options_.cache_dir / (key + ".txt");
    if (!cached.empty() && std::filesystem::is_regular_file(cached)) return read_file(cached);

    json body = {
        {"model", options_.model},
        {"max_tokens", options_.max_tokens},
        {"messages",
         json::array({{{"role", "user"},
                       {"content",
                        json::array({{{"type", "text"}, {"text", prompt_text(tmpl)}},
                                     {{"type", "image_url"},
                                      {"image_url",
                                       {{"url", "data:" + image_mime(image) + ";base64," + base64_encode(bytes)}}}}})}}})},
    };
    if (options_.temperature) body["temperature"] = *options_.temperature;
    HttpRequest req{options_.endpoint,
                    {{"Authorization", "Bearer " + api_key_}, {"Content-Type", "application/json"}},
                    body.dump()};

    slots_.acquire();
    std::string raw;
    try {
      raw = post_with_retries(*transport_, req, options_.max_attempts, options_.initial_backoff);
    } catch (...) {
      slots_.release();
      throw;
    }
    slots_.release();

    std::string text;
    try {
      const json res = json::parse(raw);
      text = res.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw ProviderError(std::string("malformed VLM response: ") + e.what());
    }
    if (!cached.empty()) write_file_atomic(cached, text);
    return text;
  }

 private:
  HttpVlmOptions options_;
  std::string api_key_;
  std::shared_ptr<HttpTransport> transport_;
  std::counting_semaphore<64> slots_;
};

std::vector<std::string> tokens_of(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (!(n > 0.0)) throw ProviderError("embedding has zero norm");
  for (double& x : v) x /= n;
}

class StubEmbedder final : public EmbeddingProvider {
 public:
  StubEmbedder(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {
    if (dim_ == 0) throw ConfigError("embedding dimension must be positive");
  }

  std::vector<double> embed(std::string_view text) const override {
    std::vector<double> v(dim_, 0.0);
    auto tokens = tokens_of(text);
    if (tokens.empty()) tokens.emplace_back();
    for (const auto& token : tokens) {
      Rng rng(stream_seed(seed_, token));
      for (double& x : v) x += rng.normal();
    }
    normalize(v);
    return v;
  }
  std::size_t dim() const override { return dim_; }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

class HttpEmbedder final : public EmbeddingProvider {
 public:
  HttpEmbedder(HttpEmbeddingOptions options, std::shared_ptr<HttpTransport> transport)
      : options_(std::move(options)),
        transport_(transport ? std::move(transport) : std::shared_ptr<HttpTransport>(default_http_transport())) {
    split_url(options_.endpoint);
    if (const char* key = std::getenv(options_.api_key_env.c_str()); key != nullptr && *key != '\0') api_key_ = key;
  }

  std::vector<double> embed(std::string_view text) const override {
    const std::string key(text);
    {
      std::lock_guard lock(mutex_);
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    HttpRequest req{options_.endpoint, {{"Content-Type", "application/json"}},
                    json{{"model", options_.model}, {"input", key}}.dump()};
    if (!api_key_.empty()) req.headers["Authorization"] = "Bearer " + api_key_;
    const std::string raw = post_with_retries(*transport_, req, 3, std::chrono::milliseconds(250));
    std::vector<double> v;
    try {
      v = json::parse(raw).at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ProviderError(std::string("malformed embedding response: ") + e.what());
    }
    if (v.size() != options_.dim) {
      throw ProviderError("embedding has dimension " + std::to_string(v.size()) + ", expected " +
                          std::to_string(options_.dim));
    }
    normalize(v);
    std::lock_guard lock(mutex_);
    return memo_.emplace(key, std::move(v)).first->second;
  }
  std::size_t dim() const override { return options_.dim; }

 private:
  HttpEmbeddingOptions options_;
  std::shared_ptr<HttpTransport> transport_;
  std::string api_key_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::vector<double>> memo_;
};

}  // namespace

std::string_view to_string(PromptTemplate t) {
  switch (t) {
    case PromptTemplate::Base: return "base";
    case PromptTemplate::Reminder: return "reminder";
    case PromptTemplate::ContextExample: return "context_example";
    case PromptTemplate::Cot: return "cot";
  }
  return "base";
}

std::optional<PromptTemplate> prompt_template_from_string(std::string_view id) {
  if (!id.empty() && id.front() == '+') id.remove_prefix(1);
  for (auto t : {PromptTemplate::Base, PromptTemplate::Reminder, PromptTemplate::ContextExample, PromptTemplate::Cot}) {
    if (id == to_string(t)) return t;
  }
  return std::nullopt;
}

PromptSections prompt_sections() {
  return {prompt_assets::basic, prompt_assets::context_example, prompt_assets::reminder, prompt_assets::cot};
}

std::string prompt_text(PromptTemplate t) {
  const PromptSections s = prompt_sections();
  std::vector<std::string_view> parts{s.basic};
  if (t == PromptTemplate::ContextExample || t == PromptTemplate::Cot) parts.push_back(s.context_example);
  if (t != PromptTemplate::Base) parts.push_back(s.reminder);
  if (t == PromptTemplate::Cot) parts.push_back(s.cot);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += '\n';
    out += parts[i];
  }
  return out;
}

std::unique_ptr<StructureProvider> fixture_provider(const std::filesystem::path& dir) {
  return std::make_unique<FixtureProvider>(dir);
}

std::unique_ptr<HttpTransport> default_http_transport(std::chrono::milliseconds timeout) {
  return std::make_unique<HttplibTransport>(timeout);
}

std::unique_ptr<StructureProvider> http_vlm_provider(HttpVlmOptions options, std::shared_ptr<HttpTransport> transport) {
  return std::make_unique<HttpVlmProvider>(std::move(options), std::move(transport));
}

std::string response_cache_key(std::string_view image_bytes, PromptTemplate tmpl) {
  return sha256_hex(sha256_hex(image_bytes) + ":" + std::string(to_string(tmpl)));
}

std::unique_ptr<EmbeddingProvider> stub_embedder(std::uint64_t seed, std::size_t dim) {
  return std::make_unique<StubEmbedder>(seed, dim);
}

std::unique_ptr<EmbeddingProvider> http_embedder(HttpEmbeddingOptions options, std::shared_ptr<HttpTransport> transport) {
  return std::make_unique<HttpEmbedder>(std::move(options), std::move(transport));
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw InvariantError("embedding dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

std::string retrieve_semantics(std::string_view label, const std::vector<std::string>& vocabulary,
                               const EmbeddingProvider& embedder) {
  if (vocabulary.empty()) throw InvariantError("vocabulary is empty");
  if (tokens_of(label).empty()) throw InvariantError("label is empty");
  const auto q = embedder.embed(label);
  std::size_t best = 0;
  double best_d = HUGE_VAL;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    const auto e = embedder.embed(vocabulary[i]);
    double d = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) d += (q[k] - e[k]) * (q[k] - e[k]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return vocabulary[best];
}

}  // namespace sxcad
