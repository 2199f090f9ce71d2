#include "panda/evaluation.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "panda/error.hpp"
#include "panda/util.hpp"

namespace panda::eval {

using nlohmann::json;

// ---------------------------------------------------------------- datasets

std::vector<LabeledExample> parse_dataset(std::istream& in) {
    std::vector<LabeledExample> out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            LabeledExample ex;
            ex.id = j.at("id").get<std::string>();
            ex.text = j.at("text").get<std::string>();
            ex.gold = j.at("gold").get<int>();
            if (auto r = j.find("rationale"); r != j.end() && r->is_string()) ex.rationale = r->get<std::string>();
            if (!seen.insert(ex.id).second) throw DuplicateId(ex.id);
            out.push_back(std::move(ex));
        } catch (const json::exception& e) {
            throw MalformedRecord(lineno, e.what());
        }
    }
    return out;
}

std::vector<LabeledExample> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot open " + path);
    return parse_dataset(in);
}

json to_json(const LabeledExample& ex) {
    json j{{"id", ex.id}, {"text", ex.text}, {"gold", ex.gold}};
    if (ex.rationale) j["rationale"] = *ex.rationale;
    return j;
}

void write_dataset(const std::vector<LabeledExample>& examples, std::ostream& out) {
    for (const auto& ex : examples) out << to_json(ex).dump() << '\n';
}

// ---------------------------------------------------------------- macro-F1

ClassificationReport macro_f1(const std::vector<int>& preds, const std::vector<int>& golds, int num_classes) {
    if (preds.size() != golds.size()) {
        throw LengthMismatch(std::to_string(preds.size()) + " predictions vs " + std::to_string(golds.size()) +
                             " golds");
    }
    if (golds.empty()) throw EmptyInput("macro_f1 needs at least one example");
    if (num_classes < 1) throw ConfigError("num_classes must be positive");

    const auto c = static_cast<std::size_t>(num_classes);
    std::vector<std::size_t> tp(c, 0), fp(c, 0), fn(c, 0);
    ClassificationReport report;
    report.n_examples = golds.size();
    for (std::size_t i = 0; i < golds.size(); ++i) {
        const int g = golds[i];
        const int p = preds[i];
        if (g < 0 || g >= num_classes) throw Error("LabelOutOfRange", "gold label " + std::to_string(g));
        if (p == kParseFailure) {
            ++report.n_parse_failures;
            ++fn[static_cast<std::size_t>(g)];
            continue;
        }
        if (p < 0 || p >= num_classes) throw Error("LabelOutOfRange", "predicted label " + std::to_string(p));
        if (p == g) {
            ++tp[static_cast<std::size_t>(g)];
        } else {
            ++fp[static_cast<std::size_t>(p)];
            ++fn[static_cast<std::size_t>(g)];
        }
    }

    report.per_class_f1.resize(c);
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
        const auto denom = 2 * tp[k] + fp[k] + fn[k];
        report.per_class_f1[k] = tp[k] == 0 ? 0.0 : 2.0 * static_cast<double>(tp[k]) / static_cast<double>(denom);
        sum += report.per_class_f1[k];
    }
    report.macro_f1 = sum / static_cast<double>(c);
    return report;
}

// ---------------------------------------------------------------- classification runs

namespace {

void validate_setup(const ClassificationEvalSetup& s) {
    s.mode.validate();
    if (s.mode.kind == prompt::PromptKind::agent) throw ConfigError("agent mode is not a classification mode");
    if (s.task.labels.size() < 2) throw ConfigError("classification needs at least two labels");
    if (s.mode.uses_retrieval()) {
        if (!s.pool) throw ConfigError("this mode needs an insight pool");
        if (!s.embedder) throw ConfigError("this mode needs an embedding provider");
        if (s.embedder->id() != s.pool->embedder_id()) {
            throw ConfigError("pool was embedded with " + s.pool->embedder_id() + " but the embedder is " +
                              s.embedder->id());
        }
    }
    if (s.mode.ablation != prompt::Ablation::none && !s.expert) {
        throw ConfigError(std::string(prompt::to_string(s.mode.ablation)) + " needs the expert records");
    }
    if (s.mode.is_few_shot() && s.exemplars.size() < s.mode.shots) {
        throw MissingExemplars(s.mode.shots, s.exemplars.size());
    }
}

const prefs::ExpertOutputRecord& expert_record(const ClassificationEvalSetup& s, const std::string& source_id) {
    auto it = s.expert->find(source_id);
    if (it == s.expert->end()) throw Error("UnknownSource", "no expert record for " + source_id);
    return it->second;
}

ExampleOutcome evaluate_one(const LabeledExample& ex, const ClassificationEvalSetup& s, llm::Gateway& gateway) {
    ExampleOutcome out{ex.id, ex.gold, kParseFailure, {}, {}, {}};

    prompt::TaskPromptPieces pieces{s.task, ex.text, s.exemplars, {}};
    std::vector<prompt::ContextItem> contexts;

    if (s.mode.uses_retrieval()) {
        auto cfg = s.retrieval;
        if (s.mode.ablation == prompt::Ablation::pseudo_label_shots) cfg.k = s.mode.shots;
        const auto hits = retrieval::top_k_retrieve(*s.pool, ex.text, cfg, *s.embedder);
        for (const auto& hit : hits.hits) {
            const auto& insight = s.pool->insight(hit.index);
            switch (s.mode.ablation) {
                case prompt::Ablation::none:
                    contexts.push_back({insight.id, insight.text});
                    break;
                case prompt::Ablation::raw1:
                case prompt::Ablation::raw2: {
                    const auto& rec = expert_record(s, insight.source_id);
                    auto ranking = prefs::rank_candidates(rec, s.mode.ablation == prompt::Ablation::raw1 ? 1 : 2);
                    for (auto& c : ranking.ranked) c.text = s.task.labels.render_labelled(c.text);
                    contexts.push_back({insight.id, prompt::render_ablation_context(ranking, s.mode.ablation)});
                    break;
                }
                case prompt::Ablation::pseudo_label_shots: {
                    const auto& rec = expert_record(s, insight.source_id);
                    const auto top = prefs::rank_candidates(rec, 1).preferred();
                    const auto label = s.task.labels.value_of(top.text);
                    if (!label) throw MissingLabelMapping("expert label \"" + top.text + "\" is not in the mapping");
                    pieces.context_exemplars.push_back({rec.query, *label, std::nullopt});
                    out.inserted_insights.push_back(insight.id);
                    break;
                }
            }
        }
    }

    auto assembled = prompt::render_inference_prompt_classification(pieces, contexts, s.mode);
    if (!assembled.inserted_insights.empty()) out.inserted_insights = assembled.inserted_insights;

    try {
        const auto response = gateway.complete(gateway.request(assembled.text, llm::kClassificationMaxTokens));
        out.response = response.text;
        out.pred = prompt::parse_classification_answer(response.text, static_cast<int>(s.task.labels.size()), s.mode)
                       .value_or(kParseFailure);
    } catch (const ProviderError& e) {
        out.error = e.what();
    } catch (const Timeout& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace

ClassificationReport run_classification_eval(const std::vector<LabeledExample>& dataset,
                                             const ClassificationEvalSetup& setup, llm::Gateway& gateway) {
    validate_setup(setup);
    if (dataset.empty()) throw EmptyInput("dataset is empty");
    const int num_classes = static_cast<int>(setup.task.labels.size());
    for (const auto& ex : dataset) {
        if (ex.gold < 0 || ex.gold >= num_classes) {
            throw ConfigError("example " + ex.id + " has gold label " + std::to_string(ex.gold) + " outside [0, " +
                              std::to_string(num_classes) + ")");
        }
    }

    std::vector<ExampleOutcome> outcomes(dataset.size());
    std::vector<std::string> config_errors(dataset.size());
    const auto n = static_cast<std::ptrdiff_t>(dataset.size());
    const int threads = static_cast<int>(std::max<std::size_t>(1, setup.workers));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            outcomes[idx] = evaluate_one(dataset[idx], setup, gateway);
        } catch (const ConfigError& e) {
            config_errors[idx] = e.what();
        } catch (const std::exception& e) {
            outcomes[idx] = ExampleOutcome{dataset[idx].id, dataset[idx].gold, kParseFailure, {}, {}, e.what()};
        }
    }
    for (const auto& err : config_errors) {
        if (!err.empty()) throw ConfigError(err);
    }

    std::vector<int> preds, golds;
    preds.reserve(outcomes.size());
    golds.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        preds.push_back(o.pred);
        golds.push_back(o.gold);
    }
    auto report = macro_f1(preds, golds, num_classes);
    report.outcomes = std::move(outcomes);
    return report;
}

// ---------------------------------------------------------------- episodes

std::string parse_action(std::string_view response) {
    for (const auto& line : split_lines(response)) {
        auto t = trim(line);
        while (!t.empty() && t.front() == '>') t = trim(std::string_view(t).substr(1));
        if (!t.empty()) return t;
    }
    return {};
}

EpisodeResult run_agent_episode(env::Environment& environment, const EpisodeConfig& config, const InsightPool* pool,
                                const retrieval::EmbeddingProvider* embedder, llm::Gateway& gateway) {
    if (pool && !embedder) throw ConfigError("retrieval needs an embedding provider");
    if (pool && embedder->id() != pool->embedder_id()) {
        throw ConfigError("pool was embedded with " + pool->embedder_id() + " but the embedder is " + embedder->id());
    }

    EpisodeResult result;
    result.task_id = config.task;
    result.variation_id = config.variation;

    auto state = environment.reset(config.task, config.variation);
    auto check_score = [](double score) {
        if (!std::isfinite(score) || score < 0.0 || score > 100.0) {
            throw EnvProtocolError("score " + std::to_string(score) + " outside [0, 100]");
        }
    };
    check_score(state.score);
    result.score = state.score;
    result.done = state.done;

    std::string observation = env::extended_observation(state);
    result.trajectory = "Here is the task.\n" + observation;

    std::vector<prompt::ContextItem> insights;
    auto retrieve = [&] {
        insights.clear();
        if (!pool) return;
        for (const auto& hit : retrieval::top_k_retrieve(*pool, observation, config.retrieval, *embedder).hits) {
            insights.push_back({hit.insight_id, pool->insight(hit.index).text});
        }
    };
    if (!result.done) retrieve();

    while (!result.done && result.steps < config.step_cap) {
        if (config.refresh_per_step && result.steps > 0) retrieve();
        const auto prompt_text = prompt::render_inference_prompt_agent(config.init_prompt, insights,
                                                                       result.trajectory + "\n>")
                                     .text;
        const auto response = gateway.complete(gateway.request(prompt_text, llm::kAgentMaxTokens));
        const auto action = parse_action(response.text);

        state = environment.step(action);
        check_score(state.score);
        ++result.steps;
        result.actions.push_back(action);
        observation = env::extended_observation(state);
        result.trajectory += "\n> " + action + "\n" + observation;
        result.score = state.score;
        result.done = state.done;
    }
    result.hit_step_cap = !result.done && result.steps >= config.step_cap;
    return result;
}

EpisodeAggregate aggregate_episodes(const std::vector<EpisodeResult>& results, std::size_t rounds) {
    if (rounds == 0) throw ConfigError("rounds must be at least 1");
    if (results.empty()) throw EmptyResults();

    EpisodeAggregate agg;
    agg.rounds = rounds;
    std::map<std::pair<std::string, std::string>, double> sums;
    for (const auto& r : results) {
        const auto key = std::make_pair(r.task_id, r.variation_id);
        sums[key] += r.score;
        ++agg.counts[key];
    }
    std::map<std::string, std::pair<double, std::size_t>> task_sums;
    for (const auto& [key, sum] : sums) {
        const auto count = agg.counts[key];
        const double mean = sum / static_cast<double>(count);
        agg.per_variation[key] = mean;
        auto& t = task_sums[key.first];
        t.first += mean;
        ++t.second;
        if (count != rounds) agg.incomplete.push_back(key);
    }
    for (const auto& [task, acc] : task_sums) agg.per_task[task] = acc.first / static_cast<double>(acc.second);
    return agg;
}

// ---------------------------------------------------------------- label flipping

FlipOutcome flip_labels(const std::vector<LabeledExample>& dataset, const FlipSpec& spec) {
    if (!(spec.target_accuracy > 0.0) || spec.target_accuracy > 1.0 || !std::isfinite(spec.target_accuracy)) {
        throw InvalidTA(spec.target_accuracy);
    }
    if (spec.num_classes < 2) throw ConfigError("label flipping needs at least two classes");
    for (const auto& ex : dataset) {
        if (ex.gold < 0 || ex.gold >= spec.num_classes) {
            throw ConfigError("example " + ex.id + " has gold label outside [0, num_classes)");
        }
    }

    const auto n = dataset.size();
    const auto kept = static_cast<std::size_t>(std::llround(spec.target_accuracy * static_cast<double>(n)));
    const auto flips = n - std::min(kept, n);

    FlipOutcome out{dataset, {}};
    const auto perm = seeded_permutation(n, spec.seed);
    out.flipped.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(flips));
    std::sort(out.flipped.begin(), out.flipped.end());

    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    const auto others = static_cast<std::uint64_t>(spec.num_classes - 1);
    for (auto idx : out.flipped) {
        auto& ex = out.examples[idx];
        const auto r = static_cast<int>(uniform_below(rng, others));
        ex.gold = r < ex.gold ? r : r + 1;
    }
    return out;
}

}  // namespace panda::eval
