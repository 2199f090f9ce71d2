#include "panda/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "http_client.hpp"
#include "panda/error.hpp"
#include "panda/util.hpp"

namespace panda::llm {

using nlohmann::json;

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
    const double scaled = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, attempt - 1);
    const auto capped = std::min(scaled, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<long long>(capped));
}

bool is_transient_status(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

ChatResponse complete(const ChatRequest& request, ChatProvider& provider, const RetryPolicy& policy) {
    if (request.prompt.empty()) throw Error("InvalidRequest", "prompt is empty");
    if (request.max_tokens <= 0) throw Error("InvalidRequest", "max_tokens must be positive");
    if (request.temperature < 0.0) throw Error("InvalidRequest", "temperature must be non-negative");

    const int attempts = std::max(1, policy.max_attempts);
    for (int attempt = 1;; ++attempt) {
        try {
            return provider.send(request);
        } catch (const ProviderError& e) {
            if (!is_transient_status(e.status()) || attempt >= attempts) throw;
        } catch (const Timeout&) {
            if (attempt >= attempts) throw;
        }
        policy.sleep(policy.backoff(attempt));
    }
}

// ---------------------------------------------------------------- mock

MockProvider::MockProvider(std::vector<Rule> rules, std::string default_reply, std::vector<std::string> fail_patterns)
    : default_reply_(std::move(default_reply)) {
    for (auto& r : rules) rules_.push_back({std::regex(r.pattern), std::move(r.reply)});
    for (auto& f : fail_patterns) fail_.emplace_back(f);
}

std::unique_ptr<MockProvider> MockProvider::from_json_text(const std::string& text) {
    std::vector<Rule> rules;
    std::vector<std::string> fails;
    std::string def;
    try {
        const auto j = json::parse(text);
        for (const auto& r : j.value("rules", json::array())) {
            rules.push_back({r.at("pattern").get<std::string>(), r.at("reply").get<std::string>()});
        }
        def = j.value("default", "");
        fails = j.value("fail_patterns", std::vector<std::string>{});
        return std::make_unique<MockProvider>(std::move(rules), std::move(def), std::move(fails));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("mock rules: ") + e.what());
    } catch (const std::regex_error& e) {
        throw ConfigError(std::string("mock rules: bad regex: ") + e.what());
    }
}

std::unique_ptr<MockProvider> MockProvider::from_json_file(const std::string& path) {
    return from_json_text(read_file(path));
}

ChatResponse MockProvider::send(const ChatRequest& request) {
    ++calls_;
    for (const auto& f : fail_) {
        if (std::regex_search(request.prompt, f)) throw ProviderError(500, "mock failure");
    }
    std::string text = default_reply_;
    for (const auto& rule : rules_) {
        std::smatch m;
        if (std::regex_search(request.prompt, m, rule.re)) {
            text = m.format(rule.reply);
            break;
        }
    }
    ChatResponse out;
    out.model = request.model;
    out.usage.prompt_tokens = static_cast<int>(request.prompt.size() / 4);
    out.usage.completion_tokens = static_cast<int>(text.size() / 4);
    out.usage.total_tokens = out.usage.prompt_tokens + out.usage.completion_tokens;
    out.text = std::move(text);
    return out;
}

// ---------------------------------------------------------------- http

HttpChatProvider::HttpChatProvider(HttpChatConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("LLM endpoint is not configured");
}

ChatResponse HttpChatProvider::send(const ChatRequest& request) {
    json body{{"model", request.model},
              {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
    const auto res = detail::post_json(config_.endpoint, body.dump(), config_.api_key, config_.timeout);
    if (res.status == 0) {
        if (res.timed_out) throw Timeout(config_.endpoint + ": " + res.transport_error);
        throw ProviderError(0, res.transport_error);
    }
    if (!res.ok()) throw ProviderError(res.status, res.body);

    ChatResponse out;
    try {
        const auto j = json::parse(res.body);
        out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        out.model = j.value("model", request.model);
        if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
            out.usage.prompt_tokens = u->value("prompt_tokens", 0);
            out.usage.completion_tokens = u->value("completion_tokens", 0);
            out.usage.total_tokens = u->value("total_tokens", 0);
        }
    } catch (const json::exception& e) {
        throw ProviderError(res.status, std::string("malformed completion response: ") + e.what());
    }
    return out;
}

// ---------------------------------------------------------------- cache

std::string cache_key(const ChatRequest& request) {
    // The JSON array keeps field boundaries unambiguous.
    const json material = json::array({request.model, request.prompt, request.temperature, request.max_tokens});
    return sha256_hex(material.dump());
}

namespace {

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

ResponseCache::ResponseCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // created on first put
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            ChatResponse r;
            r.text = j.at("text").get<std::string>();
            r.model = j.at("model").get<std::string>();
            const auto& u = j.at("usage");
            r.usage = {u.at("prompt_tokens").get<int>(), u.at("completion_tokens").get<int>(),
                       u.at("total_tokens").get<int>()};
            entries_[j.at("key").get<std::string>()] = std::move(r);
        } catch (const json::exception& e) {
            throw CacheCorrupt(path_, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    return std::nullopt;
}

void ResponseCache::put(const std::string& key, const ChatResponse& response) {
    std::unique_lock lock(mutex_);
    json line{{"key", key},
              {"model", response.model},
              {"text", response.text},
              {"usage",
               {{"prompt_tokens", response.usage.prompt_tokens},
                {"completion_tokens", response.usage.completion_tokens},
                {"total_tokens", response.usage.total_tokens}}},
              {"created_at", utc_now()}};
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw Error("IoError", "cannot append to cache " + path_);
    out << line.dump() << '\n';
    out.flush();
    auto stored = response;
    stored.from_cache = false;
    entries_[key] = std::move(stored);
}

std::size_t ResponseCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

ChatResponse cached_complete(const ChatRequest& request, ChatProvider& provider, ResponseCache& cache,
                             const RetryPolicy& policy) {
    const auto key = cache_key(request);
    if (auto hit = cache.get(key)) {
        hit->from_cache = true;
        return *hit;
    }
    auto response = complete(request, provider, policy);
    cache.put(key, response);
    return response;
}

// ---------------------------------------------------------------- gateway

Gateway::Gateway(ChatProvider& provider, std::string model, ResponseCache* cache, RetryPolicy policy)
    : provider_(provider), model_(std::move(model)), cache_(cache), policy_(std::move(policy)) {}

ChatRequest Gateway::request(std::string prompt, int max_tokens) const {
    return ChatRequest{model_, std::move(prompt), 0.0, max_tokens};
}

ChatResponse Gateway::complete(const ChatRequest& request) {
    const auto key = cache_key(request);
    if (cache_) {
        if (auto hit = cache_->get(key)) {
            hit->from_cache = true;
            return *hit;
        }
    }

    std::promise<ChatResponse> promise;
    std::shared_future<ChatResponse> shared;
    bool leader = false;
    {
        std::lock_guard lock(inflight_mutex_);
        if (auto it = inflight_.find(key); it != inflight_.end()) {
            shared = it->second;
        } else if (auto hit = cache_ ? cache_->get(key) : std::nullopt) {
            // a leader finished between our first lookup and taking the lock
            hit->from_cache = true;
            return *hit;
        } else {
            shared = promise.get_future().share();
            inflight_.emplace(key, shared);
            leader = true;
        }
    }
    if (!leader) return shared.get();

    try {
        ++provider_calls_;
        auto response = llm::complete(request, provider_, policy_);
        if (cache_) cache_->put(key, response);
        promise.set_value(response);
    } catch (...) {
        promise.set_exception(std::current_exception());
    }
    {
        std::lock_guard lock(inflight_mutex_);
        inflight_.erase(key);
    }
    return shared.get();
}

}  // namespace panda::llm
