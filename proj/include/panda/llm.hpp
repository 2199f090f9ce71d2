#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <shared_mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace panda::llm {

inline constexpr int kInsightMaxTokens = 512;
inline constexpr int kClassificationMaxTokens = 256;
inline constexpr int kAgentMaxTokens = 128;

struct ChatRequest {
    std::string model;
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = kClassificationMaxTokens;
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
    int total_tokens = 0;

    bool operator==(const TokenUsage&) const = default;
};

struct ChatResponse {
    std::string text;
    std::string model;
    TokenUsage usage;
    bool from_cache = false;

    bool operator==(const ChatResponse&) const = default;
};

/// A single-shot chat backend. `send` throws ProviderError (status 0 for
/// transport failures) or Timeout; retrying is the caller's business.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    virtual ChatResponse send(const ChatRequest& request) = 0;
};

struct RetryPolicy {
    int max_attempts = 3;  ///< including the first
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{8000};
    /// Replaceable for tests.
    std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
        std::this_thread::sleep_for(d);
    };

    [[nodiscard]] std::chrono::milliseconds backoff(int attempt) const;
};

/// Transport errors, timeouts, 408, 429 and 5xx are retried.
bool is_transient_status(int status);

/// Calls the provider, retrying transient failures with exponential
/// backoff. Rethrows the last error once attempts run out.
ChatResponse complete(const ChatRequest& request, ChatProvider& provider, const RetryPolicy& policy = {});

/// Deterministic offline provider. Rules are tried in order; the first
/// whose regex matches anywhere in the prompt produces the reply, with
/// `$1`-style group references expanded. Prompts matching a failure
/// pattern raise ProviderError(500). The reply is a pure function of the
/// request.
class MockProvider final : public ChatProvider {
public:
    struct Rule {
        std::string pattern;
        std::string reply;
    };

    MockProvider() = default;
    MockProvider(std::vector<Rule> rules, std::string default_reply, std::vector<std::string> fail_patterns = {});

    /// Reads {"rules":[{"pattern":..,"reply":..}], "default":.., "fail_patterns":[..]}.
    static std::unique_ptr<MockProvider> from_json_file(const std::string& path);
    static std::unique_ptr<MockProvider> from_json_text(const std::string& text);

    [[nodiscard]] std::string name() const override { return "mock"; }
    ChatResponse send(const ChatRequest& request) override;

    [[nodiscard]] std::size_t calls() const noexcept { return calls_.load(); }

private:
    struct CompiledRule {
        std::regex re;
        std::string reply;
    };
    std::vector<CompiledRule> rules_;
    std::vector<std::regex> fail_;
    std::string default_reply_;
    std::atomic<std::size_t> calls_{0};
};

struct HttpChatConfig {
    std::string endpoint;  ///< full URL of the chat-completions route
    std::string api_key;
    std::chrono::milliseconds timeout{60000};
};

/// Chat-completions style JSON over HTTP(S).
class HttpChatProvider final : public ChatProvider {
public:
    explicit HttpChatProvider(HttpChatConfig config);

    [[nodiscard]] std::string name() const override { return "http"; }
    ChatResponse send(const ChatRequest& request) override;

private:
    HttpChatConfig config_;
};

/// Digest over (model, prompt, temperature, max_tokens); the full prompt is hashed.
std::string cache_key(const ChatRequest& request);

/// Append-only JSONL response cache. Reads are concurrent, writes are
/// serialised. Opening a file with an unparseable line throws CacheCorrupt.
class ResponseCache {
public:
    explicit ResponseCache(std::string path);

    [[nodiscard]] std::optional<ChatResponse> get(const std::string& key) const;
    void put(const std::string& key, const ChatResponse& response);
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, ChatResponse> entries_;
};

/// Cache lookup, falling back to `complete` and storing the result.
ChatResponse cached_complete(const ChatRequest& request, ChatProvider& provider, ResponseCache& cache,
                             const RetryPolicy& policy = {});

/// Provider + optional cache + retry policy behind one thread-safe entry
/// point. Concurrent identical requests share a single provider call.
class Gateway {
public:
    Gateway(ChatProvider& provider, std::string model, ResponseCache* cache = nullptr, RetryPolicy policy = {});

    ChatResponse complete(const ChatRequest& request);

    /// Request with this gateway's model and temperature 0.
    [[nodiscard]] ChatRequest request(std::string prompt, int max_tokens) const;

    [[nodiscard]] const std::string& model() const noexcept { return model_; }
    [[nodiscard]] std::size_t provider_calls() const noexcept { return provider_calls_.load(); }

private:
    ChatProvider& provider_;
    std::string model_;
    ResponseCache* cache_;
    RetryPolicy policy_;
    std::mutex inflight_mutex_;
    std::map<std::string, std::shared_future<ChatResponse>> inflight_;
    std::atomic<std::size_t> provider_calls_{0};
};

}  // namespace panda::llm
