#include "panda/preference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "panda/error.hpp"

namespace panda::prefs {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* field, std::size_t line) {
    auto it = j.find(field);
    if (it == j.end()) {
        throw MalformedRecord(line, std::string("missing field \"") + field + "\"");
    }
    return *it;
}

std::string require_string(const json& j, const char* field, std::size_t line) {
    const auto& v = require(j, field, line);
    if (!v.is_string()) {
        throw MalformedRecord(line, std::string("field \"") + field + "\" must be a string");
    }
    return v.get<std::string>();
}

}  // namespace

ExpertOutputRecord record_from_json(const json& j, std::size_t line) {
    if (!j.is_object()) throw MalformedRecord(line, "record must be a JSON object");

    ExpertOutputRecord r;
    r.id = require_string(j, "id", line);
    r.task = require_string(j, "task", line);
    r.query = require_string(j, "query", line);

    const auto& cands = require(j, "candidates", line);
    if (!cands.is_array()) throw MalformedRecord(line, "\"candidates\" must be an array");
    for (const auto& c : cands) {
        if (!c.is_object()) throw MalformedRecord(line, "candidate must be an object");
        CandidateResponse cr;
        cr.text = require_string(c, "text", line);
        const auto& score = require(c, "score", line);
        if (!score.is_number()) throw MalformedRecord(line, "candidate score must be a number");
        cr.score = score.get<double>();
        if (cr.text.empty()) throw MalformedRecord(line, "candidate text is empty");
        if (!std::isfinite(cr.score)) throw MalformedRecord(line, "candidate score is not finite");
        r.candidates.push_back(std::move(cr));
    }
    if (r.candidates.empty()) throw EmptyCandidates(r.id);

    if (auto it = j.find("gold"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw MalformedRecord(line, "\"gold\" must be a string or null");
        r.gold = it->get<std::string>();
    }
    return r;
}

json record_to_json(const ExpertOutputRecord& r) {
    json cands = json::array();
    for (const auto& c : r.candidates) cands.push_back({{"text", c.text}, {"score", c.score}});
    return {{"id", r.id},
            {"task", r.task},
            {"query", r.query},
            {"candidates", std::move(cands)},
            {"gold", r.gold ? json(*r.gold) : json(nullptr)}};
}

std::vector<ExpertOutputRecord> parse_expert_records(std::istream& in) {
    std::vector<ExpertOutputRecord> records;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw MalformedRecord(lineno, e.what());
        }
        auto rec = record_from_json(j, lineno);
        if (!seen.insert(rec.id).second) throw DuplicateId(rec.id);
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<ExpertOutputRecord> parse_expert_records_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IoError", "cannot open " + path);
    return parse_expert_records(in);
}

PreferenceRanking rank_candidates(const ExpertOutputRecord& record, std::size_t n) {
    const auto& c = record.candidates;
    if (n == 0) throw Error("InvalidArgument", "n must be positive");
    if (n > c.size()) throw NTooLarge(n, c.size());

    std::vector<std::size_t> order(c.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return c[a].score > c[b].score; });

    PreferenceRanking out;
    out.record_id = record.id;
    out.n = n;
    out.ranked.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.ranked.push_back(c[order[i]]);
    return out;
}

ExpertOutputRecord classifier_record_from_logits(std::string id, std::string task, std::string query,
                                                 const std::vector<std::string>& class_names,
                                                 const std::vector<double>& logits,
                                                 std::optional<std::string> gold) {
    if (class_names.size() != logits.size()) {
        throw LengthMismatch(std::to_string(class_names.size()) + " classes vs " +
                             std::to_string(logits.size()) + " logits");
    }
    if (class_names.size() < 2) throw LengthMismatch("a classifier needs at least 2 classes");

    ExpertOutputRecord r{std::move(id), std::move(task), std::move(query), {}, std::move(gold)};
    r.candidates.reserve(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (!std::isfinite(logits[i])) throw NonFiniteScore("logit for class " + class_names[i]);
        r.candidates.push_back({class_names[i], logits[i]});
    }
    return r;
}

}  // namespace panda::prefs
