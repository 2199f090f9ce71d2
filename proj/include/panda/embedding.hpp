#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace panda::retrieval {

/// Fixed-length dense embedding; every component finite.
struct EmbeddingVector {
    std::vector<double> values;

    [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

/// Sentence-embedding backend. Implementations must return exactly `dim()`
/// components per input and be safe to call from several threads.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// Stable identifier recorded in pool headers, e.g. "hash-v1/256".
    [[nodiscard]] virtual std::string id() const = 0;
    [[nodiscard]] virtual std::size_t dim() const = 0;
    [[nodiscard]] virtual std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts) const = 0;
};

/// Embeds one text and checks the provider's dimension contract
/// (DimMismatch) and finiteness.
EmbeddingVector embed_text(const std::string& text, const EmbeddingProvider& provider);
std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts, const EmbeddingProvider& provider);

/// Deterministic offline embedder: signed feature hashing of lowercased
/// alphanumeric tokens, L2-normalised. Texts sharing words get positive
/// similarity; the empty string maps to the zero vector.
class HashEmbedder final : public EmbeddingProvider {
public:
    explicit HashEmbedder(std::size_t dim = 256);

    [[nodiscard]] std::string id() const override;
    [[nodiscard]] std::size_t dim() const override { return dim_; }
    [[nodiscard]] std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts) const override;

    [[nodiscard]] std::vector<double> embed_one(const std::string& text) const;

private:
    std::size_t dim_;
};

struct HttpEmbedderConfig {
    std::string endpoint;  ///< full URL, e.g. http://localhost:8080/v1/embeddings
    std::string api_key;
    std::string model;
    std::size_t dim = 384;
    std::chrono::milliseconds timeout{30000};
};

/// Remote provider speaking {"input":[...],"model":...} -> {"data":[{"embedding":[...]}]}.
class HttpEmbedder final : public EmbeddingProvider {
public:
    explicit HttpEmbedder(HttpEmbedderConfig config);

    [[nodiscard]] std::string id() const override;
    [[nodiscard]] std::size_t dim() const override { return config_.dim; }
    [[nodiscard]] std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts) const override;

private:
    HttpEmbedderConfig config_;
};

}  // namespace panda::retrieval
