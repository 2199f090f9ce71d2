#pragma once

#include <map>
#include <string>
#include <vector>

#include "panda/embedding.hpp"

namespace panda::testing {

// Returns preregistered vectors; unknown keys map to the zero vector.
class TableEmbedder final : public retrieval::EmbeddingProvider {
public:
    TableEmbedder(std::size_t dim, std::map<std::string, std::vector<double>> table)
        : dim_(dim), table_(std::move(table)) {}
    std::string id() const override { return "table"; }
    std::size_t dim() const override { return dim_; }
    std::vector<std::vector<double>> embed_batch(std::span<const std::string> texts) const override {
        std::vector<std::vector<double>> out;
        for (const auto& t : texts) {
            auto it = table_.find(t);
            out.push_back(it == table_.end() ? std::vector<double>(dim_, 0.0) : it->second);
        }
        return out;
    }

private:
    std::size_t dim_;
    std::map<std::string, std::vector<double>> table_;
};

}  // namespace panda::testing
