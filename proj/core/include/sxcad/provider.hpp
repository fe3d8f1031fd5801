#pragma once

// Sources of discrete structure (raw VLM responses) and label embeddings.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sxcad {

enum class PromptTemplate { Base, Reminder, ContextExample, Cot };

std::string_view to_string(PromptTemplate t);
std::optional<PromptTemplate> prompt_template_from_string(std::string_view id);

/// Prompt text for a template. Sections nest cumulatively:
/// Base < Reminder < ContextExample < Cot.
std::string prompt_text(PromptTemplate t);

/// Raw shipped sections, in prompt order.
struct PromptSections {
  std::string_view basic;
  std::string_view context_example;
  std::string_view reminder;
  std::string_view cot;
};
PromptSections prompt_sections();

class StructureProvider {
 public:
  virtual ~StructureProvider() = default;
  /// Raw response text for the image. `image` is a fixture key or a file path,
  /// depending on the implementation.
  virtual std::string request(const std::string& image, PromptTemplate tmpl) = 0;
};

/// Serves `<dir>/<key>.txt`. Unknown keys raise ProviderError.
std::unique_ptr<StructureProvider> fixture_provider(const std::filesystem::path& dir);

struct HttpRequest {
  std::string url;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Performs one POST. Throws TransportError (attempts = 1) on network failure.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib transport; https URLs need the library built with OpenSSL.
std::unique_ptr<HttpTransport> default_http_transport(std::chrono::milliseconds timeout = std::chrono::seconds(120));

struct HttpVlmOptions {
  std::string endpoint;  ///< chat-completions URL
  std::string model = "gpt-4-vision-preview";
  std::string api_key_env = "VLM_API_KEY";
  std::optional<double> temperature;
  int max_tokens = 4096;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  int max_in_flight = 4;
  /// Responses land in `<cache_dir>/<sha256>.txt`; empty disables caching.
  std::filesystem::path cache_dir = "cache";
};

/// Posts the image (read from disk, sent as a base64 data URL) with the
/// template text. Throws ConfigError at construction when the API key
/// variable is unset.
std::unique_ptr<StructureProvider> http_vlm_provider(HttpVlmOptions options,
                                                     std::shared_ptr<HttpTransport> transport = nullptr);

/// Cache key for an image/template pair.
std::string response_cache_key(std::string_view image_bytes, PromptTemplate tmpl);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Unit vector of dimension dim().
  virtual std::vector<double> embed(std::string_view text) const = 0;
  virtual std::size_t dim() const = 0;
};

/// Token-bag embedder: the sum of seeded per-token hash vectors, normalized.
/// Texts with no tokens map to a fixed seeded vector.
std::unique_ptr<EmbeddingProvider> stub_embedder(std::uint64_t seed = 0, std::size_t dim = 512);

struct HttpEmbeddingOptions {
  std::string endpoint;  ///< OpenAI-style /embeddings URL
  std::string model = "clip-vit-b-32";
  std::string api_key_env = "EMBEDDING_API_KEY";
  std::size_t dim = 512;
};

/// Remote embedder; results are memoized per text. The key variable may be unset.
std::unique_ptr<EmbeddingProvider> http_embedder(HttpEmbeddingOptions options,
                                                 std::shared_ptr<HttpTransport> transport = nullptr);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Vocabulary entry closest to `label` in embedding L2 distance; ties go to
/// the earliest entry.
std::string retrieve_semantics(std::string_view label, const std::vector<std::string>& vocabulary,
                               const EmbeddingProvider& embedder);

}  // namespace sxcad
