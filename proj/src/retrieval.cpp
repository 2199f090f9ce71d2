#include "panda/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "panda/error.hpp"
#include "panda/similarity_kernels.hpp"

namespace panda::retrieval {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimMismatch(a.size(), b.size());
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    return cosine_similarity(std::span<const double>(a.values), std::span<const double>(b.values));
}

RetrievalResult top_k_by_vector(const InsightPool& pool, std::span<const double> query, const RetrievalConfig& cfg) {
    if (cfg.k == 0) throw ConfigError("retrieval k must be at least 1");
    if (query.size() != pool.embedding_dim()) throw DimMismatch(pool.embedding_dim(), query.size());
    if (pool.empty()) return {};

    std::vector<double> scores(pool.size());
    if (pool.size() >= kernels::kParallelThreshold) {
        kernels::cosine_scores_omp(pool.matrix(), pool.norms(), query, scores);
    } else {
        kernels::cosine_scores_serial(pool.matrix(), pool.norms(), query, scores);
    }

    std::vector<std::size_t> rows;
    rows.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!cfg.min_similarity || scores[i] >= *cfg.min_similarity) rows.push_back(i);
    }

    const auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return pool.insight(a).id < pool.insight(b).id;
    };
    const auto take = std::min(cfg.k, rows.size());
    std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take), rows.end(), better);

    RetrievalResult out;
    out.hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.hits.push_back({pool.insight(rows[i]).id, rows[i], scores[rows[i]]});
    }
    return out;
}

RetrievalResult top_k_retrieve(const InsightPool& pool, const std::string& key, const RetrievalConfig& cfg,
                               const EmbeddingProvider& provider) {
    if (provider.dim() != pool.embedding_dim()) throw DimMismatch(pool.embedding_dim(), provider.dim());
    if (pool.empty()) return {};
    const auto q = embed_text(key, provider);
    return top_k_by_vector(pool, q.values, cfg);
}

}  // namespace panda::retrieval
