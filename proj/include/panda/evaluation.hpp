#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "panda/embedding.hpp"
#include "panda/environment.hpp"
#include "panda/llm.hpp"
#include "panda/pool.hpp"
#include "panda/preference.hpp"
#include "panda/prompts.hpp"
#include "panda/retrieval.hpp"

namespace panda::eval {

/// Prediction value for an answer that could not be parsed.
inline constexpr int kParseFailure = -1;

struct LabeledExample {
    std::string id;
    std::string text;
    int gold = 0;
    std::optional<std::string> rationale;  ///< optional FS-CoT demonstration text

    bool operator==(const LabeledExample&) const = default;
};

/// Dataset JSONL: {"id":string,"text":string,"gold":int[,"rationale":string]}.
std::vector<LabeledExample> parse_dataset(std::istream& in);
std::vector<LabeledExample> load_dataset(const std::string& path);
nlohmann::json to_json(const LabeledExample& example);
void write_dataset(const std::vector<LabeledExample>& examples, std::ostream& out);

struct ExampleOutcome {
    std::string id;
    int gold = 0;
    int pred = kParseFailure;
    std::string response;
    std::vector<std::string> inserted_insights;
    std::string error;  ///< gateway failure, if any
};

struct ClassificationReport {
    double macro_f1 = 0.0;
    std::vector<double> per_class_f1;
    std::size_t n_examples = 0;
    std::size_t n_parse_failures = 0;
    std::vector<ExampleOutcome> outcomes;  ///< in dataset order
};

/// Macro-F1 over all `num_classes` classes, present in `golds` or not.
/// Per-class F1 is 0 when precision + recall is 0. A prediction of
/// kParseFailure counts as a false negative for the gold class only.
ClassificationReport macro_f1(const std::vector<int>& preds, const std::vector<int>& golds, int num_classes);

struct ClassificationEvalSetup {
    prompt::ClassificationTask task;
    prompt::InferenceMode mode;
    std::vector<prompt::Exemplar> exemplars;  ///< baseline shots, already selected
    const InsightPool* pool = nullptr;
    const retrieval::EmbeddingProvider* embedder = nullptr;
    retrieval::RetrievalConfig retrieval;
    /// Expert records by id; needed by the raw and pseudo-label ablations
    /// to recover the preference behind a retrieved insight.
    const std::unordered_map<std::string, prefs::ExpertOutputRecord>* expert = nullptr;
    std::size_t workers = 4;
};

/// Retrieve (when the mode uses retrieval), assemble, complete, parse and
/// score every example. Gateway failures become parse failures with the
/// error kept in the outcome. Throws ConfigError for an unusable setup.
ClassificationReport run_classification_eval(const std::vector<LabeledExample>& dataset,
                                             const ClassificationEvalSetup& setup, llm::Gateway& gateway);

struct EpisodeResult {
    std::string task_id;
    std::string variation_id;
    double score = 0.0;
    std::size_t steps = 0;
    std::string trajectory;
    bool done = false;
    bool hit_step_cap = false;
    std::vector<std::string> actions;
};

struct EpisodeConfig {
    std::string task;
    std::string variation;
    std::size_t step_cap = 30;
    bool refresh_per_step = true;
    std::string init_prompt =
        "You are an agent acting in a text-based science environment. Reply with exactly one action for the next "
        "step and nothing else.";
    retrieval::RetrievalConfig retrieval{retrieval::kDefaultAgentK, std::nullopt};
};

/// The first non-empty response line, trimmed, with any leading '>' removed.
std::string parse_action(std::string_view response);

/// One observe/retrieve/prompt/act loop until the environment reports done
/// or `step_cap` actions have been taken. Retrieval is keyed on the latest
/// extended observation; retrieved insights replace earlier ones.
EpisodeResult run_agent_episode(env::Environment& environment, const EpisodeConfig& config, const InsightPool* pool,
                                const retrieval::EmbeddingProvider* embedder, llm::Gateway& gateway);

struct EpisodeAggregate {
    std::map<std::pair<std::string, std::string>, double> per_variation;  ///< (task, variation) -> mean
    std::map<std::string, double> per_task;  ///< unweighted mean of variation means
    std::map<std::pair<std::string, std::string>, std::size_t> counts;
    std::size_t rounds = 0;
    /// Variations whose episode count differs from `rounds`.
    std::vector<std::pair<std::string, std::string>> incomplete;
};

EpisodeAggregate aggregate_episodes(const std::vector<EpisodeResult>& results, std::size_t rounds);

inline constexpr std::size_t kDefaultRounds = 5;

struct FlipSpec {
    double target_accuracy = 1.0;  ///< in (0, 1]
    std::uint64_t seed = 0;
    int num_classes = 2;
};

struct FlipOutcome {
    std::vector<LabeledExample> examples;  ///< input order preserved
    std::vector<std::size_t> flipped;      ///< indices, ascending
};

/// Replaces exactly N - round(TA * N) gold labels, each with a label drawn
/// uniformly (seeded) from the other num_classes - 1 classes.
FlipOutcome flip_labels(const std::vector<LabeledExample>& dataset, const FlipSpec& spec);

}  // namespace panda::eval
