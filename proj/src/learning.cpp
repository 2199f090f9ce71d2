#include "panda/learning.hpp"

#include <omp.h>

#include <algorithm>

#include "panda/error.hpp"
#include "panda/template.hpp"
#include "panda/util.hpp"

namespace panda::learn {

std::string_view to_string(LearningMode mode) {
    return mode == LearningMode::classification ? "classification" : "agent";
}

LearningMode parse_learning_mode(std::string_view s) {
    if (s == "classification") return LearningMode::classification;
    if (s == "agent") return LearningMode::agent;
    throw ConfigError("unknown learning mode \"" + std::string(s) + "\"");
}

std::string LearningPromptSpec::resolved_template_id() const {
    if (!template_id.empty()) return template_id;
    return std::string(mode == LearningMode::classification ? prompt::templates::kLearningClassification
                                                            : prompt::templates::kLearningAgent);
}

void LearningPromptSpec::validate() const {
    if (mode == LearningMode::classification && (!label_mapping || label_mapping->empty())) {
        throw MissingLabelMapping("classification learning needs a label mapping");
    }
    (void)prompt::builtin_template(resolved_template_id());
}

std::string preference_phrase(const prefs::PreferenceRanking& ranking,
                              const std::function<std::string(const std::string&)>& format) {
    const auto& r = ranking.ranked;
    if (r.empty()) throw RankingTooShort(1, 0);
    if (r.size() == 1) return format(r[0].text);
    std::vector<std::string> pairs;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        pairs.push_back(format(r[i].text) + " rather than " + format(r[i + 1].text));
    }
    return join(pairs, ", and ");
}

std::string render_learning_prompt_classification(const prefs::ExpertOutputRecord& record,
                                                  const prefs::PreferenceRanking& ranking,
                                                  const LearningPromptSpec& spec) {
    if (!spec.label_mapping || spec.label_mapping->empty()) {
        throw MissingLabelMapping("classification learning needs a label mapping");
    }
    if (ranking.ranked.empty()) throw RankingTooShort(1, 0);
    const auto& labels = *spec.label_mapping;
    const auto phrase = preference_phrase(ranking, [&](const std::string& t) { return labels.render_labelled(t); });

    return prompt::render(prompt::builtin_template(spec.resolved_template_id()),
                          {{"task name", spec.task_name},
                           {"mapping in task", labels.render_mapping()},
                           {"candidate answer", labels.render_candidates()},
                           {"Query", record.query},
                           {"expert preference", phrase}});
}

std::string render_learning_prompt_agent(std::string_view trajectory, const prefs::PreferenceRanking& ranking) {
    if (ranking.ranked.size() < 2) throw RankingTooShort(2, ranking.ranked.size());
    const auto phrase = preference_phrase(ranking, [](const std::string& action) { return "to " + action; });
    return prompt::render(prompt::builtin_template(prompt::templates::kLearningAgent),
                          {{"Current Trajectory", std::string(trajectory)}, {"expert preference", phrase}});
}

std::string postprocess_insight(std::string_view raw) {
    std::string text;
    text.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '\r' && i + 1 < raw.size() && raw[i + 1] == '\n') continue;
        text.push_back(raw[i]);
    }
    auto trimmed = trim(text);
    constexpr std::string_view marker = "INSIGHT:";
    if (starts_with(trimmed, marker)) trimmed = trim(std::string_view(trimmed).substr(marker.size()));
    if (trimmed.empty()) throw EmptyInsight();
    return trimmed;
}

std::string latest_observation(std::string_view trajectory) {
    auto lines = split_lines(trajectory);
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (!lines.empty() && trim(lines.back()) == ">") lines.pop_back();

    std::size_t start = 0;
    for (std::size_t i = lines.size(); i-- > 0;) {
        if (starts_with(lines[i], "> ")) {
            start = i + 1;
            break;
        }
    }
    std::vector<std::string> tail(lines.begin() + static_cast<std::ptrdiff_t>(start), lines.end());
    return trim(join(tail, "\n"));
}

KeyFn default_key_fn(LearningMode mode) {
    if (mode == LearningMode::classification) {
        return [](const prefs::ExpertOutputRecord& r) { return r.query; };
    }
    return [](const prefs::ExpertOutputRecord& r) { return latest_observation(r.query); };
}

std::string insight_id_for(const std::string& record_id) { return "ins-" + record_id; }

PoolBuildResult build_insight_pool(const std::vector<prefs::ExpertOutputRecord>& records,
                                   const LearningPromptSpec& spec, llm::Gateway& gateway,
                                   const retrieval::EmbeddingProvider& embedder, const KeyFn& key_fn,
                                   const BuildOptions& options) {
    spec.validate();
    if (options.top_n == 0) throw ConfigError("top_n must be at least 1");
    if (spec.mode == LearningMode::agent && options.top_n < 2) {
        throw ConfigError("agent learning needs top_n >= 2");
    }

    struct Slot {
        std::optional<Insight> insight;
        std::string failure;
    };
    std::vector<Slot> slots(records.size());

    const auto count = static_cast<std::ptrdiff_t>(records.size());
    const int threads = static_cast<int>(std::max<std::size_t>(1, options.workers));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto& rec = records[static_cast<std::size_t>(i)];
        auto& slot = slots[static_cast<std::size_t>(i)];
        try {
            const auto ranking = prefs::rank_candidates(rec, options.top_n);
            const auto prompt_text = spec.mode == LearningMode::classification
                                         ? render_learning_prompt_classification(rec, ranking, spec)
                                         : render_learning_prompt_agent(rec.query, ranking);
            const auto response = gateway.complete(gateway.request(prompt_text, llm::kInsightMaxTokens));
            auto key = key_fn(rec);
            if (key.empty()) throw Error("EmptyKey", "retrieval key is empty");
            slot.insight = Insight{insight_id_for(rec.id), rec.id, std::move(key), postprocess_insight(response.text),
                                   gateway.model()};
        } catch (const Error& e) {
            // Records the expert data cannot support are reported by their own error kind.
            const bool unusable = e.kind() == "NTooLarge" || e.kind() == "RankingTooShort" ||
                                  e.kind() == "MissingLabelMapping";
            slot.failure = unusable ? std::string(e.what()) : "GenerationFailed: " + std::string(e.what());
        } catch (const std::exception& e) {
            slot.failure = std::string("GenerationFailed: ") + e.what();
        }
    }

    PoolBuildResult result{InsightPool(embedder.id(), embedder.dim()), {}};
    std::vector<Insight> ready;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].insight) {
            ready.push_back(std::move(*slots[i].insight));
        } else {
            result.failures.push_back({records[i].id, slots[i].failure});
        }
    }

    const auto batch = std::max<std::size_t>(1, options.embed_batch);
    for (std::size_t start = 0; start < ready.size(); start += batch) {
        const auto end = std::min(ready.size(), start + batch);
        std::vector<std::string> keys;
        for (std::size_t i = start; i < end; ++i) keys.push_back(ready[i].key);
        auto raw = embedder.embed_batch(keys);
        if (raw.size() != keys.size()) throw EmbeddingDimMismatch(keys.size(), raw.size());
        for (std::size_t i = start; i < end; ++i) {
            const auto& v = raw[i - start];
            if (v.size() != embedder.dim()) throw EmbeddingDimMismatch(embedder.dim(), v.size());
            result.pool.add(std::move(ready[i]), v);
        }
    }
    return result;
}

}  // namespace panda::learn
