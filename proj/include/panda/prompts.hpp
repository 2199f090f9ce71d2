#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "panda/preference.hpp"

namespace panda::prompt {

enum class PromptKind { zero_shot, few_shot, zs_cot, fs_cot, agent };
enum class Ablation { none, raw1, raw2, pseudo_label_shots };

std::string_view to_string(PromptKind kind);
std::string_view to_string(Ablation ablation);
PromptKind parse_prompt_kind(std::string_view s);
Ablation parse_ablation(std::string_view s);

/// Which prompt variant to build. Raw ablations swap insight texts for the
/// expert's bare behaviour/preference and so need `with_panda`; the
/// pseudo-label ablation puts retrieved, expert-labelled training examples
/// where the insight block would go.
struct InferenceMode {
    PromptKind kind = PromptKind::zero_shot;
    std::size_t shots = 0;
    bool with_panda = false;
    Ablation ablation = Ablation::none;

    [[nodiscard]] bool is_cot() const noexcept { return kind == PromptKind::zs_cot || kind == PromptKind::fs_cot; }
    [[nodiscard]] bool is_few_shot() const noexcept {
        return kind == PromptKind::few_shot || kind == PromptKind::fs_cot;
    }
    [[nodiscard]] bool uses_retrieval() const noexcept {
        return with_panda || ablation == Ablation::pseudo_label_shots;
    }

    /// Throws ConfigError when the combination is invalid.
    void validate() const;

    bool operator==(const InferenceMode&) const = default;
};

/// Ordered label -> integer mapping, e.g. {negative: 0, neutral: 1, positive: 2}.
class LabelMapping {
public:
    LabelMapping() = default;
    explicit LabelMapping(std::vector<std::pair<std::string, int>> entries);
    /// Names mapped to 0, 1, 2, ...
    static LabelMapping from_names(const std::vector<std::string>& names);

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] const std::vector<std::pair<std::string, int>>& entries() const noexcept { return entries_; }

    [[nodiscard]] std::optional<int> value_of(std::string_view name) const;
    [[nodiscard]] std::optional<std::string> name_of(int value) const;

    /// "{negative: 0, neutral: 1, positive: 2}"
    [[nodiscard]] std::string render_mapping() const;
    /// "0 or 1 or 2"
    [[nodiscard]] std::string render_candidates() const;
    /// "positive(2)"; throws MissingLabelMapping for an unknown name.
    [[nodiscard]] std::string render_labelled(std::string_view name) const;

private:
    std::vector<std::pair<std::string, int>> entries_;
};

struct ClassificationTask {
    std::string task_name;  ///< e.g. "sentiment"
    LabelMapping labels;
};

/// A labelled demonstration. `rationale` is used by FS-CoT; it should end
/// with the answer cue, otherwise "So, the answer is N." is appended.
struct Exemplar {
    std::string text;
    int label = 0;
    std::optional<std::string> rationale;
};

/// Everything task-specific the classification templates need.
struct TaskPromptPieces {
    ClassificationTask task;
    std::string query;
    std::vector<Exemplar> exemplars;          ///< baseline shots; the first `shots` are used
    std::vector<Exemplar> context_exemplars;  ///< pseudo-label ablation only
};

/// Retrieved context (an insight, or an ablation stand-in) and its id.
struct ContextItem {
    std::string id;
    std::string text;
};

struct AssembledPrompt {
    std::string text;
    std::vector<std::string> inserted_insights;
    InferenceMode mode;
    std::vector<std::string> warnings;
};

inline constexpr std::string_view kInsightHeader =
    "These are some insights that may be helpful for you to improve the success rate:";
inline constexpr std::string_view kAnswerCue = "the answer is";

/// The zero-shot / few-shot / CoT prompt without any insight block.
std::string render_baseline_prompt(const TaskPromptPieces& base, const InferenceMode& mode);

/// Baseline prompt, preceded by the insight block when `mode.with_panda`
/// and at least one insight is given, or by pseudo-labelled examples in the
/// pseudo-label ablation. Insight texts are joined by blank lines in the
/// order given.
AssembledPrompt render_inference_prompt_classification(const TaskPromptPieces& base,
                                                       std::span<const ContextItem> insights,
                                                       const InferenceMode& mode);

/// Init prompt, insight block (omitted when empty), trajectory.
AssembledPrompt render_inference_prompt_agent(std::string_view init_prompt, std::span<const ContextItem> insights,
                                              std::string_view trajectory);

/// raw1: "the expert prefers A"; raw2: "the expert prefers A rather than B".
std::string render_ablation_context(const prefs::PreferenceRanking& ranking, Ablation ablation);

/// Non-CoT: the first standalone integer in [0, num_classes). CoT: the
/// integer right after the last "the answer is" (case-insensitive).
/// nullopt is a parse failure.
std::optional<int> parse_classification_answer(std::string_view response, int num_classes,
                                               const InferenceMode& mode);

/// The first `shots` items of a seeded shuffle of `pool`.
std::vector<Exemplar> select_exemplars(std::span<const Exemplar> pool, std::size_t shots, std::uint64_t seed);

}  // namespace panda::prompt
