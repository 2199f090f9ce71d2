#include "panda/pool.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "panda/error.hpp"

namespace panda {

using nlohmann::json;

InsightPool::InsightPool(std::string embedder_id, std::size_t embedding_dim)
    : embedder_id_(std::move(embedder_id)), dim_(embedding_dim) {
    if (dim_ == 0) throw PoolFormatError("embedding_dim must be positive");
}

void InsightPool::add(Insight insight, std::span<const double> embedding) {
    if (embedding.size() != dim_) throw EmbeddingDimMismatch(dim_, embedding.size());
    if (index_.contains(insight.id)) throw DuplicateId(insight.id);

    double sq = 0.0;
    for (double x : embedding) sq += x * x;

    index_.emplace(insight.id, insights_.size());
    insights_.push_back(std::move(insight));
    matrix_.insert(matrix_.end(), embedding.begin(), embedding.end());
    norms_.push_back(std::sqrt(sq));
}

std::span<const double> InsightPool::embedding(std::size_t i) const {
    if (i >= insights_.size()) throw std::out_of_range("pool entry index");
    return std::span<const double>(matrix_).subspan(i * dim_, dim_);
}

std::optional<std::size_t> InsightPool::find(const std::string& id) const {
    if (auto it = index_.find(id); it != index_.end()) return it->second;
    return std::nullopt;
}

std::vector<std::size_t> InsightPool::canonical_order() const {
    std::vector<std::size_t> order(insights_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return insights_[a].id < insights_[b].id; });
    return order;
}

void write_pool(const InsightPool& pool, std::ostream& out) {
    out << json{{"schema", kPoolSchema}, {"embedder_id", pool.embedder_id()}, {"embedding_dim", pool.embedding_dim()}}
               .dump()
        << '\n';
    for (auto i : pool.canonical_order()) {
        const auto& in = pool.insight(i);
        const auto emb = pool.embedding(i);
        json line{{"id", in.id},
                  {"source_id", in.source_id},
                  {"key", in.key},
                  {"insight", in.text},
                  {"embedding", std::vector<double>(emb.begin(), emb.end())},
                  {"created_by", in.created_by}};
        out << line.dump() << '\n';
    }
}

void save_pool(const InsightPool& pool, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot write " + path);
    write_pool(pool, out);
}

InsightPool read_pool(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw PoolFormatError("missing header line");

    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw PoolFormatError(std::string("header: ") + e.what());
    }
    if (!header.is_object() || header.value("schema", "") != kPoolSchema) {
        throw PoolFormatError("unsupported schema (expected " + std::string(kPoolSchema) + ")");
    }

    std::optional<InsightPool> pool;
    try {
        pool.emplace(header.at("embedder_id").get<std::string>(), header.at("embedding_dim").get<std::size_t>());
    } catch (const json::exception& e) {
        throw PoolFormatError(std::string("header: ") + e.what());
    }

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            Insight ins{j.at("id").get<std::string>(), j.at("source_id").get<std::string>(),
                        j.at("key").get<std::string>(), j.at("insight").get<std::string>(),
                        j.at("created_by").get<std::string>()};
            const auto emb = j.at("embedding").get<std::vector<double>>();
            pool->add(std::move(ins), emb);
        } catch (const json::exception& e) {
            throw PoolFormatError("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw PoolFormatError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return std::move(*pool);
}

InsightPool load_pool(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot open " + path);
    return read_pool(in);
}

}  // namespace panda
