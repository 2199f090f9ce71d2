#include "panda/prompts.hpp"

#include <algorithm>
#include <cctype>

#include "panda/error.hpp"
#include "panda/template.hpp"
#include "panda/util.hpp"

namespace panda::prompt {

std::string_view to_string(PromptKind kind) {
    switch (kind) {
        case PromptKind::zero_shot: return "zero_shot";
        case PromptKind::few_shot: return "few_shot";
        case PromptKind::zs_cot: return "zs_cot";
        case PromptKind::fs_cot: return "fs_cot";
        case PromptKind::agent: return "agent";
    }
    return "?";
}

std::string_view to_string(Ablation ablation) {
    switch (ablation) {
        case Ablation::none: return "none";
        case Ablation::raw1: return "raw1";
        case Ablation::raw2: return "raw2";
        case Ablation::pseudo_label_shots: return "pseudo_label_shots";
    }
    return "?";
}

PromptKind parse_prompt_kind(std::string_view s) {
    for (auto k : {PromptKind::zero_shot, PromptKind::few_shot, PromptKind::zs_cot, PromptKind::fs_cot,
                   PromptKind::agent}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown prompt kind \"" + std::string(s) + "\"");
}

Ablation parse_ablation(std::string_view s) {
    for (auto a : {Ablation::none, Ablation::raw1, Ablation::raw2, Ablation::pseudo_label_shots}) {
        if (to_string(a) == s) return a;
    }
    throw ConfigError("unknown ablation \"" + std::string(s) + "\"");
}

void InferenceMode::validate() const {
    if (!is_few_shot() && shots != 0) {
        throw ConfigError("shots must be 0 for " + std::string(to_string(kind)));
    }
    if ((ablation == Ablation::raw1 || ablation == Ablation::raw2) && !with_panda) {
        throw ConfigError("raw ablations replace insight text and need with_panda");
    }
    if (ablation == Ablation::pseudo_label_shots) {
        if (with_panda) throw ConfigError("pseudo_label_shots replaces the insight block; drop with_panda");
        if (!is_few_shot() || shots == 0) throw ConfigError("pseudo_label_shots needs a few-shot kind with shots >= 1");
    }
}

// ---------------------------------------------------------------- labels

LabelMapping::LabelMapping(std::vector<std::pair<std::string, int>> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (entries_[i].first == entries_[j].first || entries_[i].second == entries_[j].second) {
                throw ConfigError("label mapping has a repeated name or value");
            }
        }
    }
}

LabelMapping LabelMapping::from_names(const std::vector<std::string>& names) {
    std::vector<std::pair<std::string, int>> e;
    for (std::size_t i = 0; i < names.size(); ++i) e.emplace_back(names[i], static_cast<int>(i));
    return LabelMapping(std::move(e));
}

std::optional<int> LabelMapping::value_of(std::string_view name) const {
    for (const auto& [n, v] : entries_) {
        if (n == name) return v;
    }
    return std::nullopt;
}

std::optional<std::string> LabelMapping::name_of(int value) const {
    for (const auto& [n, v] : entries_) {
        if (v == value) return n;
    }
    return std::nullopt;
}

std::string LabelMapping::render_mapping() const {
    std::string out = "{";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i) out += ", ";
        out += entries_[i].first + ": " + std::to_string(entries_[i].second);
    }
    return out + "}";
}

std::string LabelMapping::render_candidates() const {
    std::vector<std::string> values;
    for (const auto& e : entries_) values.push_back(std::to_string(e.second));
    return join(values, " or ");
}

std::string LabelMapping::render_labelled(std::string_view name) const {
    const auto v = value_of(name);
    if (!v) throw MissingLabelMapping("label \"" + std::string(name) + "\" is not in the mapping");
    return std::string(name) + "(" + std::to_string(*v) + ")";
}

// ---------------------------------------------------------------- classification prompts

namespace {

PlaceholderValues task_values(const ClassificationTask& task, const std::string& text) {
    return {{"task name", task.task_name},
            {"mapping in task", task.labels.render_mapping()},
            {"candidate answer", task.labels.render_candidates()},
            {"Query", text}};
}

bool contains_answer_cue(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    return lower.find(kAnswerCue) != std::string::npos;
}

std::string render_exemplar(const ClassificationTask& task, const Exemplar& ex, bool cot) {
    const auto values = task_values(task, ex.text);
    if (!cot) {
        return render(builtin_template(templates::kClassificationZeroShot), values) + " " + std::to_string(ex.label);
    }
    std::string out = render(builtin_template(templates::kClassificationCot), values) + "\n";
    const std::string answer = "So, the answer is " + std::to_string(ex.label) + ".";
    if (ex.rationale && !ex.rationale->empty()) {
        out += *ex.rationale;
        if (!contains_answer_cue(*ex.rationale)) out += "\n" + answer;
    } else {
        out += answer;
    }
    return out;
}

std::string render_exemplars(const ClassificationTask& task, std::span<const Exemplar> exemplars, bool cot) {
    std::vector<std::string> parts;
    for (const auto& ex : exemplars) parts.push_back(render_exemplar(task, ex, cot));
    return join(parts, "\n\n");
}

}  // namespace

std::string render_baseline_prompt(const TaskPromptPieces& base, const InferenceMode& mode) {
    if (mode.kind == PromptKind::agent) throw ConfigError("agent mode has no classification baseline");
    if (base.task.labels.empty()) throw MissingLabelMapping("classification prompt without labels");

    const bool cot = mode.is_cot();
    const auto query = render(builtin_template(cot ? templates::kClassificationCot : templates::kClassificationZeroShot),
                              task_values(base.task, base.query));
    if (!mode.is_few_shot() || mode.shots == 0) return query;

    if (base.exemplars.size() < mode.shots) throw MissingExemplars(mode.shots, base.exemplars.size());
    const auto shots = std::span<const Exemplar>(base.exemplars).first(mode.shots);
    return render_exemplars(base.task, shots, cot) + "\n\n" + query;
}

AssembledPrompt render_inference_prompt_classification(const TaskPromptPieces& base,
                                                       std::span<const ContextItem> insights,
                                                       const InferenceMode& mode) {
    mode.validate();
    AssembledPrompt out;
    out.mode = mode;
    const auto baseline = render_baseline_prompt(base, mode);

    if (mode.ablation == Ablation::pseudo_label_shots) {
        if (base.context_exemplars.empty()) {
            out.warnings.emplace_back("pseudo_label_shots: no retrieved examples; emitting baseline prompt");
            out.text = baseline;
            return out;
        }
        out.text = render_exemplars(base.task, base.context_exemplars, mode.is_cot()) + "\n\n" + baseline;
        return out;
    }

    if (!mode.with_panda) {
        out.text = baseline;
        return out;
    }
    if (insights.empty()) {
        out.warnings.emplace_back("EmptyInsightsWithPanda: no insights retrieved; emitting prompt without block");
        out.text = baseline;
        return out;
    }

    std::vector<std::string> texts;
    for (const auto& in : insights) {
        texts.push_back(in.text);
        out.inserted_insights.push_back(in.id);
    }
    out.text = render(builtin_template(templates::kInferenceClassificationPanda),
                      {{"Retrieved Insights", join(texts, "\n\n")}, {"Task Prompt", baseline}});
    return out;
}

AssembledPrompt render_inference_prompt_agent(std::string_view init_prompt, std::span<const ContextItem> insights,
                                              std::string_view trajectory) {
    AssembledPrompt out;
    out.mode = InferenceMode{PromptKind::agent, 0, !insights.empty(), Ablation::none};
    PlaceholderValues values{{"Init Prompt", std::string(init_prompt)}, {"Current Trajectory", std::string(trajectory)}};
    if (insights.empty()) {
        out.text = render(builtin_template(templates::kInferenceAgent), values);
        return out;
    }
    std::vector<std::string> texts;
    for (const auto& in : insights) {
        texts.push_back(in.text);
        out.inserted_insights.push_back(in.id);
    }
    values.emplace("Retrieved Insights", join(texts, "\n\n"));
    out.text = render(builtin_template(templates::kInferenceAgentPanda), values);
    return out;
}

std::string render_ablation_context(const prefs::PreferenceRanking& ranking, Ablation ablation) {
    switch (ablation) {
        case Ablation::raw1:
            if (ranking.ranked.empty()) throw RankingTooShort(1, 0);
            return "the expert prefers " + ranking.ranked[0].text;
        case Ablation::raw2:
            if (ranking.ranked.size() < 2) throw RankingTooShort(2, ranking.ranked.size());
            return "the expert prefers " + ranking.ranked[0].text + " rather than " + ranking.ranked[1].text;
        default:
            throw ConfigError("render_ablation_context handles raw1/raw2 only");
    }
}

// ---------------------------------------------------------------- answer parsing

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::optional<int> to_label(std::string_view digits, int num_classes) {
    if (digits.empty() || digits.size() > 9) return std::nullopt;
    int v = 0;
    for (char c : digits) v = v * 10 + (c - '0');
    if (v < 0 || v >= num_classes) return std::nullopt;
    return v;
}

}  // namespace

std::optional<int> parse_classification_answer(std::string_view response, int num_classes, const InferenceMode& mode) {
    if (num_classes < 2) throw ConfigError("num_classes must be at least 2");

    if (mode.is_cot()) {
        std::string lower(response);
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        const auto cue = lower.rfind(kAnswerCue);
        if (cue == std::string::npos) return std::nullopt;
        std::size_t i = cue + kAnswerCue.size();
        while (i < response.size() && (response[i] == ' ' || response[i] == '#' || response[i] == ':' ||
                                       response[i] == '*' || response[i] == '"' || response[i] == '\'')) {
            ++i;
        }
        std::size_t j = i;
        while (j < response.size() && is_digit(response[j])) ++j;
        if (j < response.size() && is_word_char(response[j])) return std::nullopt;
        return to_label(response.substr(i, j - i), num_classes);
    }

    std::size_t i = 0;
    while (i < response.size()) {
        if (!is_digit(response[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < response.size() && is_digit(response[j])) ++j;
        const bool word_before = i > 0 && (is_word_char(response[i - 1]) || response[i - 1] == '-' ||
                                           (response[i - 1] == '.' && i > 1 && is_digit(response[i - 2])));
        const bool word_after = j < response.size() && (is_word_char(response[j]) ||
                                                        (response[j] == '.' && j + 1 < response.size() &&
                                                         is_digit(response[j + 1])));
        if (!word_before && !word_after) {
            if (auto v = to_label(response.substr(i, j - i), num_classes)) return v;
        }
        i = j;
    }
    return std::nullopt;
}

std::vector<Exemplar> select_exemplars(std::span<const Exemplar> pool, std::size_t shots, std::uint64_t seed) {
    if (shots > pool.size()) throw MissingExemplars(shots, pool.size());
    const auto perm = seeded_permutation(pool.size(), seed);
    std::vector<Exemplar> out;
    out.reserve(shots);
    for (std::size_t i = 0; i < shots; ++i) out.push_back(pool[perm[i]]);
    return out;
}

}  // namespace panda::prompt
