#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panda/embedding.hpp"
#include "panda/llm.hpp"
#include "panda/pool.hpp"
#include "panda/preference.hpp"
#include "panda/prompts.hpp"

namespace panda::learn {

enum class LearningMode { classification, agent };

std::string_view to_string(LearningMode mode);
LearningMode parse_learning_mode(std::string_view s);

struct LearningPromptSpec {
    LearningMode mode = LearningMode::classification;
    std::string task_name;
    std::optional<prompt::LabelMapping> label_mapping;  ///< required for classification
    std::string template_id;                            ///< empty selects the mode's built-in template

    /// Throws MissingLabelMapping / TemplateError.
    void validate() const;
    [[nodiscard]] std::string resolved_template_id() const;
};

/// "A rather than B[, and B rather than C ...]", or just "A" for a single
/// candidate. Each response is passed through `format` first.
std::string preference_phrase(const prefs::PreferenceRanking& ranking,
                              const std::function<std::string(const std::string&)>& format);

/// Learning prompt for a classifier expert. One candidate gives the
/// behaviour-only phrasing, two or more the preference phrasing; three or
/// more chain adjacent pairs.
std::string render_learning_prompt_classification(const prefs::ExpertOutputRecord& record,
                                                  const prefs::PreferenceRanking& ranking,
                                                  const LearningPromptSpec& spec);

/// Learning prompt for an agent expert; needs at least two actions.
std::string render_learning_prompt_agent(std::string_view trajectory, const prefs::PreferenceRanking& ranking);

/// Removes one leading "INSIGHT:" marker, normalises CRLF to LF and trims.
/// Throws EmptyInsight when nothing is left.
std::string postprocess_insight(std::string_view raw);

/// Text of the latest observation in a trajectory: everything after the
/// last "> action" line, ignoring a trailing bare ">" prompt line.
std::string latest_observation(std::string_view trajectory);

using KeyFn = std::function<std::string(const prefs::ExpertOutputRecord&)>;

/// Query text for classification, latest observation for agents.
KeyFn default_key_fn(LearningMode mode);

struct BuildFailure {
    std::string record_id;
    std::string cause;
};

struct PoolBuildResult {
    InsightPool pool;
    std::vector<BuildFailure> failures;
};

struct BuildOptions {
    std::size_t top_n = 2;
    std::size_t workers = 4;
    std::size_t embed_batch = 64;
};

/// Renders, completes and post-processes one learning prompt per record,
/// then embeds each record's key. Records that cannot be ranked or whose
/// generation fails are reported in `failures` and left out; the resulting
/// entry set does not depend on processing order.
PoolBuildResult build_insight_pool(const std::vector<prefs::ExpertOutputRecord>& records,
                                   const LearningPromptSpec& spec, llm::Gateway& gateway,
                                   const retrieval::EmbeddingProvider& embedder, const KeyFn& key_fn,
                                   const BuildOptions& options = {});

/// Pool entry id for a record.
std::string insight_id_for(const std::string& record_id);

}  // namespace panda::learn
