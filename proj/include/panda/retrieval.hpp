#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panda/embedding.hpp"
#include "panda/pool.hpp"

namespace panda::retrieval {

/// k defaults: 1 for agent episodes, 6 for classification.
inline constexpr std::size_t kDefaultAgentK = 1;
inline constexpr std::size_t kDefaultClassificationK = 6;

struct RetrievalConfig {
    std::size_t k = kDefaultClassificationK;
    std::optional<double> min_similarity;  ///< in [-1, 1]; hits strictly below are dropped
};

struct RetrievalHit {
    std::string insight_id;
    std::size_t index = 0;  ///< row in the pool
    double similarity = 0.0;

    bool operator==(const RetrievalHit&) const = default;
};

/// Hits in descending similarity, ties by ascending insight id.
struct RetrievalResult {
    std::vector<RetrievalHit> hits;

    [[nodiscard]] bool empty() const noexcept { return hits.empty(); }
    bool operator==(const RetrievalResult&) const = default;
};

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]; 0 when either norm is 0.
/// Throws DimMismatch when lengths differ.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Exact top-k over a precomputed query embedding.
RetrievalResult top_k_by_vector(const InsightPool& pool, std::span<const double> query, const RetrievalConfig& cfg);

/// Embeds `key` with `provider` and returns the top-k pool entries. An
/// empty pool yields an empty result; a provider whose dimension differs
/// from the pool's raises DimMismatch.
RetrievalResult top_k_retrieve(const InsightPool& pool, const std::string& key, const RetrievalConfig& cfg,
                               const EmbeddingProvider& provider);

}  // namespace panda::retrieval
