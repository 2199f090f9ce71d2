#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace panda {

inline constexpr std::string_view kPoolSchema = "panda-insight-pool/1";

/// An LLM-written explanation of one expert preference, keyed by the text
/// it is retrieved with.
struct Insight {
    std::string id;
    std::string source_id;
    std::string key;
    std::string text;
    std::string created_by;

    bool operator==(const Insight&) const = default;
};

/// Insights plus their key embeddings, stored row-major in one contiguous
/// matrix so retrieval can scan it directly. Immutable once loaded; all
/// const members are safe for concurrent readers.
class InsightPool {
public:
    InsightPool(std::string embedder_id, std::size_t embedding_dim);

    /// Throws EmbeddingDimMismatch on a wrong-length vector and DuplicateId
    /// when the id is already present.
    void add(Insight insight, std::span<const double> embedding);

    [[nodiscard]] const std::string& embedder_id() const noexcept { return embedder_id_; }
    [[nodiscard]] std::size_t embedding_dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return insights_.size(); }
    [[nodiscard]] bool empty() const noexcept { return insights_.empty(); }

    [[nodiscard]] const Insight& insight(std::size_t i) const { return insights_.at(i); }
    [[nodiscard]] std::span<const double> embedding(std::size_t i) const;
    [[nodiscard]] double norm(std::size_t i) const { return norms_.at(i); }
    [[nodiscard]] std::optional<std::size_t> find(const std::string& id) const;

    [[nodiscard]] std::span<const double> matrix() const noexcept { return matrix_; }
    [[nodiscard]] std::span<const double> norms() const noexcept { return norms_; }

    /// Entries sorted by id: the canonical order used for serialization,
    /// making the file independent of build order.
    [[nodiscard]] std::vector<std::size_t> canonical_order() const;

private:
    std::string embedder_id_;
    std::size_t dim_;
    std::vector<Insight> insights_;
    std::vector<double> matrix_;
    std::vector<double> norms_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Writes the JSONL pool file: header line, then one line per entry in
/// canonical order.
void write_pool(const InsightPool& pool, std::ostream& out);
void save_pool(const InsightPool& pool, const std::string& path);

/// Throws PoolFormatError on a bad header or entry.
InsightPool read_pool(std::istream& in);
InsightPool load_pool(const std::string& path);

}  // namespace panda
