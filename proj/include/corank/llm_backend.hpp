#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

namespace corank {

struct ChatRequest {
    std::string model_name;
    std::string prompt;
    double temperature = 1.0;
    std::int64_t seed = 42;
    int max_output_tokens = 2048;

    /// Throws on an empty prompt or negative temperature.
    void validate() const;
};

struct ChatResponse {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    bool operator==(const ChatResponse&) const = default;
};

/// Cache key: SHA-256 over (model_name, prompt, temperature, seed). max_output_tokens
/// is deliberately excluded.
std::string request_digest(const ChatRequest& request);

struct CacheEntry {
    std::string key;
    ChatResponse response;
    std::int64_t created_at = 0;  // unix seconds
};

class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Append-only line-delimited store of CacheEntry records. Concurrent lookups,
/// serialized appends. An empty path keeps the cache in memory only.
class ResponseCache {
  public:
    explicit ResponseCache(std::filesystem::path path = {});

    [[nodiscard]] std::optional<ChatResponse> find(const std::string& key) const;
    void insert(const std::string& key, const ChatResponse& response);
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

  private:
    std::filesystem::path path_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, ChatResponse> entries_;
};

enum class CacheMode { Record, Replay };

/// Record: serve hits from the cache, forward misses upstream and persist them.
/// Replay: serve only from the cache; a miss is a ReplayMissError.
class CachingBackend final : public ChatBackend {
  public:
    CachingBackend(std::shared_ptr<ResponseCache> cache, CacheMode mode, std::shared_ptr<ChatBackend> upstream = {});

    ChatResponse complete(const ChatRequest& request) override;

    [[nodiscard]] std::size_t hits() const noexcept { return hits_.load(); }
    [[nodiscard]] std::size_t misses() const noexcept { return misses_.load(); }

  private:
    std::shared_ptr<ResponseCache> cache_;
    CacheMode mode_;
    std::shared_ptr<ChatBackend> upstream_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    double multiplier = 2.0;
};

/// Retries TransportError with exponential backoff; other errors pass through.
/// When the budget is spent, throws BackendError carrying the attempt count.
class RetryingBackend final : public ChatBackend {
  public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    RetryingBackend(std::shared_ptr<ChatBackend> inner, RetryPolicy policy, Sleeper sleeper = {});

    ChatResponse complete(const ChatRequest& request) override;

  private:
    std::shared_ptr<ChatBackend> inner_;
    RetryPolicy policy_;
    Sleeper sleeper_;
};

/// Caps the number of in-flight requests to the wrapped backend.
class ConcurrencyLimitedBackend final : public ChatBackend {
  public:
    ConcurrencyLimitedBackend(std::shared_ptr<ChatBackend> inner, std::size_t limit);

    ChatResponse complete(const ChatRequest& request) override;

    [[nodiscard]] std::size_t peak_in_flight() const noexcept { return peak_.load(); }

  private:
    std::shared_ptr<ChatBackend> inner_;
    std::counting_semaphore<4096> slots_;
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> peak_{0};
};

struct HttpBackendConfig {
    /// Full chat-completions URL, e.g. https://api.openai.com/v1/chat/completions
    std::string endpoint;
    std::string api_key;
    double timeout_seconds = 120.0;
};

/// OpenAI-style chat-completions client. Connection failures, 429 and 5xx are
/// reported as TransportError so RetryingBackend can retry them.
class HttpChatBackend final : public ChatBackend {
  public:
    explicit HttpChatBackend(HttpBackendConfig config);

    ChatResponse complete(const ChatRequest& request) override;

  private:
    HttpBackendConfig config_;
};

/// Deterministic offline backend. Answers, in order of precedence: the custom
/// handler, the scripted FIFO, listwise prompts (ranked by word overlap), and
/// extraction prompts (answered heuristically from the document text).
class MockBackend final : public ChatBackend {
  public:
    using Handler = std::function<std::optional<std::string>(const ChatRequest&)>;

    MockBackend() = default;

    void push_response(std::string text);
    void set_handler(Handler handler);

    ChatResponse complete(const ChatRequest& request) override;

    [[nodiscard]] std::size_t calls() const noexcept { return calls_.load(); }

  private:
    mutable std::mutex mutex_;
    std::deque<std::string> scripted_;
    Handler handler_;
    std::atomic<std::size_t> calls_{0};
};

/// `[i] > [j] > ...` ordering passages by the number of distinct lowercase
/// word tokens they share with the query; ties keep the original position.
std::string mock_rank_by_overlap(std::string_view query, std::span<const std::string> passages);

}  // namespace corank
