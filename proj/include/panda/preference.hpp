#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace panda::prefs {

/// One response the expert considered, with its raw preference score
/// (classifier logit or beam log-probability).
struct CandidateResponse {
    std::string text;
    double score = 0.0;

    bool operator==(const CandidateResponse&) const = default;
};

/// A training query together with the expert's scored candidates.
struct ExpertOutputRecord {
    std::string id;
    std::string task;
    std::string query;
    std::vector<CandidateResponse> candidates;
    std::optional<std::string> gold;

    bool operator==(const ExpertOutputRecord&) const = default;
};

/// Expert preference over a record's candidates, best first.
/// `ranked[0]` is the most preferred response, `ranked[1]` (when present)
/// the runner-up.
struct PreferenceRanking {
    std::string record_id;
    std::vector<CandidateResponse> ranked;
    std::size_t n = 0;

    [[nodiscard]] const CandidateResponse& preferred() const { return ranked.at(0); }

    bool operator==(const PreferenceRanking&) const = default;
};

/// Parses expert-output JSONL. Blank lines are skipped; line numbers in
/// errors are 1-based.
std::vector<ExpertOutputRecord> parse_expert_records(std::istream& in);
std::vector<ExpertOutputRecord> parse_expert_records_file(const std::string& path);

ExpertOutputRecord record_from_json(const nlohmann::json& j, std::size_t line);
nlohmann::json record_to_json(const ExpertOutputRecord& record);

/// Top-`n` candidates by descending score; equal scores keep the lower
/// original index first.
PreferenceRanking rank_candidates(const ExpertOutputRecord& record, std::size_t n);

/// Builds a record from a classifier's per-class logits.
ExpertOutputRecord classifier_record_from_logits(std::string id, std::string task, std::string query,
                                                 const std::vector<std::string>& class_names,
                                                 const std::vector<double>& logits,
                                                 std::optional<std::string> gold = std::nullopt);

}  // namespace panda::prefs
