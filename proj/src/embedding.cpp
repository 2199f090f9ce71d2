#include "panda/embedding.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>

#include <json.hpp>

#include "http_client.hpp"
#include "panda/error.hpp"

namespace panda::retrieval {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void check_vector(const std::vector<double>& v, std::size_t dim) {
    if (v.size() != dim) throw DimMismatch(dim, v.size());
    for (double x : v) {
        if (!std::isfinite(x)) throw Error("NonFiniteEmbedding", "provider returned a non-finite component");
    }
}

}  // namespace

EmbeddingVector embed_text(const std::string& text, const EmbeddingProvider& provider) {
    return std::move(embed_texts(std::span<const std::string>(&text, 1), provider).front());
}

std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts, const EmbeddingProvider& provider) {
    auto raw = provider.embed_batch(texts);
    if (raw.size() != texts.size()) {
        throw ProviderUnavailable("provider returned " + std::to_string(raw.size()) + " embeddings for " +
                                  std::to_string(texts.size()) + " inputs");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(raw.size());
    for (auto& v : raw) {
        check_vector(v, provider.dim());
        out.push_back({std::move(v)});
    }
    return out;
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw ConfigError("embedding dimension must be positive");
}

std::string HashEmbedder::id() const { return "hash-v1/" + std::to_string(dim_); }

std::vector<double> HashEmbedder::embed_one(const std::string& text) const {
    std::vector<double> v(dim_, 0.0);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        const auto h = fnv1a(token);
        const double sign = (h >> 63) ? -1.0 : 1.0;
        v[(h & 0x7fffffffffffffffULL) % dim_] += sign;
        token.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            token.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();

    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

std::vector<std::vector<double>> HashEmbedder::embed_batch(std::span<const std::string> texts) const {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("embedding endpoint is not configured");
    if (config_.dim == 0) throw ConfigError("embedding dimension must be positive");
}

std::string HttpEmbedder::id() const { return "http:" + config_.model + "/" + std::to_string(config_.dim); }

std::vector<std::vector<double>> HttpEmbedder::embed_batch(std::span<const std::string> texts) const {
    nlohmann::json req{{"input", std::vector<std::string>(texts.begin(), texts.end())}, {"model", config_.model}};
    const auto res = detail::post_json(config_.endpoint, req.dump(), config_.api_key, config_.timeout);
    if (res.status == 0) throw ProviderUnavailable(config_.endpoint + ": " + res.transport_error);
    if (!res.ok()) throw ProviderUnavailable("HTTP " + std::to_string(res.status) + ": " + res.body);

    std::vector<std::vector<double>> out;
    try {
        const auto body = nlohmann::json::parse(res.body);
        for (const auto& item : body.at("data")) {
            out.push_back(item.at("embedding").get<std::vector<double>>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ProviderUnavailable(std::string("malformed embedding response: ") + e.what());
    }
    return out;
}

}  // namespace panda::retrieval
