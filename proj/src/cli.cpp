#include "panda/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "panda/config.hpp"
#include "panda/embedding.hpp"
#include "panda/environment.hpp"
#include "panda/error.hpp"
#include "panda/evaluation.hpp"
#include "panda/learning.hpp"
#include "panda/llm.hpp"
#include "panda/pool.hpp"
#include "panda/preference.hpp"
#include "panda/util.hpp"

namespace panda::cli {

using nlohmann::json;

namespace {

class EmptyPool : public Error {
public:
    EmptyPool() : Error("EmptyPool", "no insight could be generated") {}
};

// Option storage for one subcommand. Only flags given on the command line
// reach the CLI layer of Settings, so env and file values still apply.
struct OptionSet {
    struct Entry {
        CLI::Option* opt;
        std::string key;
        std::string value;
        bool flag;
    };
    std::vector<std::unique_ptr<Entry>> entries;

    void add(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        auto e = std::make_unique<Entry>();
        e->key = key;
        e->flag = false;
        e->opt = app->add_option(name, e->value, help);
        entries.push_back(std::move(e));
    }
    void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        auto e = std::make_unique<Entry>();
        e->key = key;
        e->flag = true;
        e->opt = app->add_flag(name, help);
        entries.push_back(std::move(e));
    }
    void apply(config::Settings& s) const {
        for (const auto& e : entries) {
            if (e->opt->count() == 0) continue;
            s.set_cli(e->key, e->flag ? "true" : e->value);
        }
    }
};

void add_common(CLI::App* app, OptionSet& o) {
    o.add(app, "--config", "config", "key = value settings file");
    o.add(app, "--provider", "provider", "mock or http");
    o.add(app, "--model", "llm_model", "model name sent to the provider");
    o.add(app, "--mock-rules", "mock_rules", "JSON rules for the mock provider");
    o.add(app, "--cache", "cache", "JSONL response cache");
    o.add(app, "--retries", "retries", "attempts per request, including the first");
    o.add(app, "--timeout-ms", "timeout_ms", "per-request timeout");
    o.add(app, "--embedder", "embedder", "hash or http");
    o.add(app, "--embed-dim", "embed_dim", "embedding dimension");
    o.add(app, "--workers", "workers", "parallel workers");
}

void fill_common(const config::Settings& s, config::PipelineConfig& c) {
    c.provider = s.get_or("provider", "mock");
    if (c.provider != "mock" && c.provider != "http") throw ConfigError("provider must be mock or http");
    c.model = s.get_or("llm_model", c.provider == "mock" ? "mock" : "");
    c.llm_endpoint = s.get_or("llm_endpoint", "");
    c.llm_key = s.get_or("llm_key", "");
    c.mock_rules = s.get_or("mock_rules", "");
    c.retries = static_cast<int>(s.get_u64("retries", 3));
    if (c.retries < 1) throw ConfigError("retries must be at least 1");
    c.timeout_ms = static_cast<long long>(s.get_u64("timeout_ms", 60000));
    c.embedder = s.get_or("embedder", "hash");
    if (c.embedder != "hash" && c.embedder != "http") throw ConfigError("embedder must be hash or http");
    c.embed_dim = s.get_size("embed_dim", c.embedder == "hash" ? 256 : 384);
    if (c.embed_dim == 0) throw ConfigError("embed_dim must be positive");
    c.embed_endpoint = s.get_or("embed_endpoint", "");
    c.embed_key = s.get_or("embed_key", "");
    c.embed_model = s.get_or("embed_model", "");
    c.workers = s.get_size("workers", 4);
    if (c.workers == 0) throw ConfigError("workers must be positive");
    if (auto cache = s.get("cache")) c.paths["cache"] = *cache;
}

std::unique_ptr<llm::ChatProvider> make_provider(const config::PipelineConfig& c) {
    if (c.provider == "mock") {
        if (c.mock_rules.empty()) throw ConfigError("the mock provider needs mock_rules");
        return llm::MockProvider::from_json_file(c.mock_rules);
    }
    if (c.llm_endpoint.empty()) throw ConfigError("the http provider needs llm_endpoint (PANDA_LLM_ENDPOINT)");
    if (c.model.empty()) throw ConfigError("the http provider needs llm_model (PANDA_LLM_MODEL)");
    return std::make_unique<llm::HttpChatProvider>(
        llm::HttpChatConfig{c.llm_endpoint, c.llm_key, std::chrono::milliseconds(c.timeout_ms)});
}

std::unique_ptr<retrieval::EmbeddingProvider> make_embedder(const config::PipelineConfig& c) {
    if (c.embedder == "hash") return std::make_unique<retrieval::HashEmbedder>(c.embed_dim);
    if (c.embed_endpoint.empty()) throw ConfigError("the http embedder needs embed_endpoint (PANDA_EMBED_ENDPOINT)");
    return std::make_unique<retrieval::HttpEmbedder>(retrieval::HttpEmbedderConfig{
        c.embed_endpoint, c.embed_key, c.embed_model, c.embed_dim, std::chrono::milliseconds(c.timeout_ms)});
}

// Provider, cache and gateway for one command.
struct LlmStack {
    std::unique_ptr<llm::ChatProvider> provider;
    std::unique_ptr<llm::ResponseCache> cache;
    std::unique_ptr<llm::Gateway> gateway;

    explicit LlmStack(const config::PipelineConfig& c) {
        provider = make_provider(c);
        if (auto it = c.paths.find("cache"); it != c.paths.end()) {
            cache = std::make_unique<llm::ResponseCache>(it->second);
        }
        llm::RetryPolicy policy;
        policy.max_attempts = c.retries;
        gateway = std::make_unique<llm::Gateway>(*provider, c.model, cache.get(), policy);
    }
};

std::string file_digest(const std::string& path) { return sha256_hex(read_file(path)); }

std::string require_path(const config::Settings& s, config::PipelineConfig& c, const std::string& key,
                         bool must_exist) {
    auto path = s.require(key);
    if (must_exist && !std::ifstream(path)) throw ConfigError(key + " file does not exist: " + path);
    c.paths[key] = path;
    return path;
}

std::string fmt(double v) { return json(v).dump(); }

prompt::LabelMapping require_labels(const config::Settings& s, config::PipelineConfig& c) {
    c.labels = config::split_list(s.require("labels"));
    if (c.labels.size() < 2) throw ConfigError("labels needs at least two comma-separated names");
    return prompt::LabelMapping::from_names(c.labels);
}

void write_jsonl(const std::string& path, const std::vector<json>& lines) {
    std::ostringstream os;
    for (const auto& l : lines) os << l.dump() << '\n';
    write_file(path, os.str());
}

// ---------------------------------------------------------------- learn

int cmd_learn(const config::Settings& s, std::ostream& out) {
    config::PipelineConfig c;
    c.command = "learn";
    fill_common(s, c);
    const auto expert_path = require_path(s, c, "expert", true);
    const auto pool_path = require_path(s, c, "pool", false);
    c.paths["report"] = s.get_or("report", pool_path + ".report.json");
    c.top_n = s.get_size("top_n", 2);
    if (c.top_n == 0) throw ConfigError("top_n must be at least 1");
    c.learning_mode = s.get_or("mode", "classification");

    const auto records = prefs::parse_expert_records_file(expert_path);
    if (records.empty()) throw ConfigError("expert file has no records");

    learn::LearningPromptSpec spec;
    try {
        spec.mode = learn::parse_learning_mode(c.learning_mode);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    c.task = s.get_or("task", records.front().task);
    spec.task_name = c.task;
    spec.template_id = s.get_or("template", "");
    if (spec.mode == learn::LearningMode::classification) spec.label_mapping = require_labels(s, c);
    spec.validate();

    LlmStack stack(c);
    const auto embedder = make_embedder(c);
    learn::BuildOptions options;
    options.top_n = c.top_n;
    options.workers = c.workers;
    auto result = learn::build_insight_pool(records, spec, *stack.gateway, *embedder, learn::default_key_fn(spec.mode),
                                            options);

    json skipped = json::array();
    for (const auto& f : result.failures) skipped.push_back({{"id", f.record_id}, {"cause", f.cause}});
    json report{{"command", "learn"},
                {"config_hash", c.hash()},
                {"config", c.to_json()},
                {"input_digests", {{"expert", file_digest(expert_path)}}},
                {"n_records", records.size()},
                {"n_entries", result.pool.size()},
                {"skipped", skipped},
                {"provider_calls", stack.gateway->provider_calls()}};

    if (result.pool.empty()) {
        write_file(c.paths["report"], report.dump(2) + "\n");
        throw EmptyPool();
    }
    save_pool(result.pool, pool_path);
    report["pool_digest"] = file_digest(pool_path);
    write_file(c.paths["report"], report.dump(2) + "\n");

    out << "wrote " << result.pool.size() << " insights to " << pool_path << " (" << result.failures.size()
        << " skipped)\n";
    out << "provider_calls=" << stack.gateway->provider_calls() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const config::Settings& s, std::ostream& out) {
    config::PipelineConfig c;
    c.command = "eval";
    fill_common(s, c);
    const auto dataset_path = require_path(s, c, "dataset", true);
    const auto report_path = require_path(s, c, "report", false);
    c.seed = s.get_u64("seed", 0);
    c.k = s.get_size("k", retrieval::kDefaultClassificationK);
    if (c.k == 0) throw ConfigError("k must be at least 1");
    c.min_similarity = s.get_double("min_similarity");
    try {
        c.mode.kind = prompt::parse_prompt_kind(s.get_or("kind", "zero_shot"));
        c.mode.ablation = prompt::parse_ablation(s.get_or("ablation", "none"));
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    c.mode.shots = s.get_size("shots", 0);
    c.mode.with_panda = s.get_bool("with_panda", false);
    c.mode.validate();
    c.task = s.require("task");

    eval::ClassificationEvalSetup setup;
    setup.task = {c.task, require_labels(s, c)};
    setup.mode = c.mode;
    setup.workers = c.workers;
    setup.retrieval = {c.mode.ablation == prompt::Ablation::pseudo_label_shots ? c.mode.shots : c.k,
                       c.min_similarity};

    json digests{{"dataset", file_digest(dataset_path)}};
    if (c.mode.is_few_shot()) {
        const auto train_path = require_path(s, c, "train", true);
        digests["train"] = file_digest(train_path);
        std::vector<prompt::Exemplar> candidates;
        for (const auto& ex : eval::load_dataset(train_path)) candidates.push_back({ex.text, ex.gold, ex.rationale});
        setup.exemplars = prompt::select_exemplars(candidates, c.mode.shots, c.seed);
    }

    std::optional<InsightPool> pool;
    std::unique_ptr<retrieval::EmbeddingProvider> embedder;
    if (c.mode.uses_retrieval()) {
        if (!s.get("pool")) throw ConfigError("this mode needs --pool");
        const auto pool_path = require_path(s, c, "pool", true);
        digests["pool"] = file_digest(pool_path);
        pool.emplace(load_pool(pool_path));
        embedder = make_embedder(c);
        setup.pool = &*pool;
        setup.embedder = embedder.get();
    }

    std::unordered_map<std::string, prefs::ExpertOutputRecord> expert;
    if (c.mode.ablation != prompt::Ablation::none) {
        if (!s.get("expert")) throw ConfigError("this ablation needs --expert");
        const auto expert_path = require_path(s, c, "expert", true);
        digests["expert"] = file_digest(expert_path);
        for (auto& r : prefs::parse_expert_records_file(expert_path)) {
            auto id = r.id;
            expert.emplace(std::move(id), std::move(r));
        }
        setup.expert = &expert;
    }

    const auto dataset = eval::load_dataset(dataset_path);
    if (dataset.empty()) throw ConfigError("dataset is empty");

    LlmStack stack(c);
    const auto report = eval::run_classification_eval(dataset, setup, *stack.gateway);

    std::vector<json> lines;
    for (const auto& o : report.outcomes) {
        json l{{"id", o.id}, {"gold", o.gold}, {"pred", o.pred}, {"response", o.response},
               {"inserted_insights", o.inserted_insights}};
        if (!o.error.empty()) l["error"] = o.error;
        lines.push_back(std::move(l));
    }
    lines.push_back({{"summary",
                      {{"macro_f1", report.macro_f1},
                       {"per_class_f1", report.per_class_f1},
                       {"n_examples", report.n_examples},
                       {"n_parse_failures", report.n_parse_failures},
                       {"ablation", prompt::to_string(c.mode.ablation)},
                       {"kind", prompt::to_string(c.mode.kind)},
                       {"with_panda", c.mode.with_panda},
                       {"seed", c.seed},
                       {"config_hash", c.hash()},
                       {"config", c.to_json()},
                       {"input_digests", digests},
                       {"provider_calls", stack.gateway->provider_calls()}}}});
    write_jsonl(report_path, lines);

    out << "macro_f1=" << fmt(report.macro_f1) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- flip

int cmd_flip(const config::Settings& s, std::ostream& out) {
    config::PipelineConfig c;
    c.command = "flip";
    const auto dataset_path = require_path(s, c, "dataset", true);
    const auto out_path = require_path(s, c, "out", false);
    const auto manifest_path = s.get_or("manifest", out_path + ".manifest.json");
    const auto ta = s.get_double("ta");
    if (!ta) throw ConfigError("flip needs --ta");
    c.seed = s.get_u64("seed", 0);

    // Unflipped lines are copied verbatim so TA = 1 reproduces the input body.
    const auto text = read_file(dataset_path);
    std::vector<std::string> raw_lines;
    for (auto& l : split_lines(text)) {
        if (!trim(l).empty()) raw_lines.push_back(std::move(l));
    }
    std::istringstream in(text);
    const auto dataset = eval::parse_dataset(in);

    int num_classes = 0;
    if (auto n = s.get("num_classes")) {
        num_classes = static_cast<int>(s.get_u64("num_classes", 0));
    } else {
        for (const auto& ex : dataset) num_classes = std::max(num_classes, ex.gold + 1);
    }

    const auto outcome = eval::flip_labels(dataset, {*ta, c.seed, num_classes});

    std::string body;
    std::size_t next = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (next < outcome.flipped.size() && outcome.flipped[next] == i) {
            body += eval::to_json(outcome.examples[i]).dump();
            ++next;
        } else {
            body += raw_lines[i];
        }
        body += '\n';
    }
    write_file(out_path, body);

    json manifest{{"command", "flip"},
                  {"seed", c.seed},
                  {"ta", *ta},
                  {"num_classes", num_classes},
                  {"n_examples", dataset.size()},
                  {"flip_count", outcome.flipped.size()},
                  {"flipped_ids", [&] {
                       json ids = json::array();
                       for (auto i : outcome.flipped) ids.push_back(dataset[i].id);
                       return ids;
                   }()},
                  {"input_digest", sha256_hex(text)},
                  {"output_digest", sha256_hex(body)}};
    write_file(manifest_path, manifest.dump(2) + "\n");
    out << "flip_count=" << outcome.flipped.size() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- episode

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

int cmd_episode(const config::Settings& s, std::ostream& out) {
    config::PipelineConfig c;
    c.command = "episode";
    fill_common(s, c);
    c.mode.kind = prompt::PromptKind::agent;
    c.k = s.get_size("k", retrieval::kDefaultAgentK);
    if (c.k == 0) throw ConfigError("k must be at least 1");
    c.mode.with_panda = s.get_bool("with_panda", false);
    const auto env_cmd = s.get_or("env_cmd", "");
    const auto env_kind = s.get_or("env", env_cmd.empty() ? "toy" : "cmd");
    if (env_kind != "toy" && env_kind != "cmd") throw ConfigError("env must be toy or cmd");
    if (env_kind == "cmd" && env_cmd.empty()) throw ConfigError("env cmd needs --env-cmd");
    c.task = s.get_or("task", env::ToyEnvironment::kTask);
    auto variations = config::split_list(s.get_or("variations", ""));
    if (variations.empty()) {
        if (env_kind != "toy") throw ConfigError("--variations is required with an external environment");
        variations = env::ToyEnvironment::variations();
    }
    const auto rounds = s.get_size("rounds", eval::kDefaultRounds);
    if (rounds == 0) throw ConfigError("rounds must be at least 1");
    const auto report_path = s.get_or("report", "");
    if (!report_path.empty()) c.paths["report"] = report_path;

    eval::EpisodeConfig ec;
    ec.task = c.task;
    ec.step_cap = s.get_size("step_cap", ec.step_cap);
    if (ec.step_cap == 0) throw ConfigError("step_cap must be at least 1");
    ec.refresh_per_step = s.get_bool("refresh_per_step", true);
    if (auto p = s.get("init_prompt")) ec.init_prompt = *p;
    ec.retrieval = {c.k, s.get_double("min_similarity")};

    std::optional<InsightPool> pool;
    std::unique_ptr<retrieval::EmbeddingProvider> embedder;
    json digests = json::object();
    if (c.mode.with_panda) {
        if (!s.get("pool")) throw ConfigError("--with-panda needs --pool");
        const auto pool_path = require_path(s, c, "pool", true);
        digests["pool"] = file_digest(pool_path);
        pool.emplace(load_pool(pool_path));
        embedder = make_embedder(c);
    }

    LlmStack stack(c);
    std::vector<eval::EpisodeResult> results;
    for (std::size_t r = 0; r < rounds; ++r) {
        for (const auto& v : variations) {
            ec.variation = v;
            std::unique_ptr<env::Environment> environment;
            if (env_kind == "toy") {
                environment = std::make_unique<env::ToyEnvironment>();
            } else {
                environment = std::make_unique<env::SubprocessEnvironment>(split_words(env_cmd));
            }
            results.push_back(eval::run_agent_episode(*environment, ec, pool ? &*pool : nullptr, embedder.get(),
                                                      *stack.gateway));
        }
    }
    const auto agg = eval::aggregate_episodes(results, rounds);
    double mean = 0.0;
    for (const auto& [task, score] : agg.per_task) mean += score;
    mean /= static_cast<double>(agg.per_task.size());

    if (!report_path.empty()) {
        std::vector<json> lines;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& e = results[i];
            lines.push_back({{"task", e.task_id},
                             {"variation", e.variation_id},
                             {"round", i / variations.size()},
                             {"score", e.score},
                             {"steps", e.steps},
                             {"done", e.done},
                             {"hit_step_cap", e.hit_step_cap},
                             {"actions", e.actions}});
        }
        json per_variation = json::object();
        for (const auto& [key, score] : agg.per_variation) per_variation[key.first + "/" + key.second] = score;
        lines.push_back({{"summary",
                          {{"mean_score", mean},
                           {"per_task", agg.per_task},
                           {"per_variation", per_variation},
                           {"rounds", rounds},
                           {"with_panda", c.mode.with_panda},
                           {"config_hash", c.hash()},
                           {"config", c.to_json()},
                           {"input_digests", digests}}}});
        write_jsonl(report_path, lines);
    }
    out << "mean_score=" << fmt(mean) << "\n";
    return kExitOk;
}

bool is_config_kind(const std::string& kind) {
    static const char* kinds[] = {"ConfigError",     "IoError",         "MalformedRecord",     "DuplicateId",
                                  "EmptyCandidates", "PoolFormatError", "CacheCorrupt",        "InvalidTA",
                                  "TemplateError",   "DimMismatch",     "EmbeddingDimMismatch", "MissingLabelMapping",
                                  "LengthMismatch",  "EmptyInput"};
    for (const char* k : kinds) {
        if (kind == k) return true;
    }
    return false;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Insight learning from expert preferences"};
    app.require_subcommand(1);

    OptionSet learn_opts, eval_opts, flip_opts, episode_opts;

    auto* learn = app.add_subcommand("learn", "build an insight pool from expert outputs");
    add_common(learn, learn_opts);
    learn_opts.add(learn, "--expert", "expert", "expert-output JSONL");
    learn_opts.add(learn, "--pool", "pool", "insight pool to write");
    learn_opts.add(learn, "--top-n", "top_n", "candidates per preference");
    learn_opts.add(learn, "--mode", "mode", "classification or agent");
    learn_opts.add(learn, "--task", "task", "task name used in prompts");
    learn_opts.add(learn, "--labels", "labels", "comma-separated label names, mapped to 0, 1, ...");
    learn_opts.add(learn, "--template", "template", "learning template id");
    learn_opts.add(learn, "--report", "report", "build report path");

    auto* ev = app.add_subcommand("eval", "classification inference and scoring");
    add_common(ev, eval_opts);
    eval_opts.add(ev, "--dataset", "dataset", "labelled JSONL to evaluate");
    eval_opts.add(ev, "--train", "train", "labelled JSONL to draw few-shot exemplars from");
    eval_opts.add(ev, "--pool", "pool", "insight pool");
    eval_opts.add(ev, "--expert", "expert", "expert-output JSONL (ablations)");
    eval_opts.add(ev, "--task", "task", "task name used in prompts");
    eval_opts.add(ev, "--labels", "labels", "comma-separated label names, mapped to 0, 1, ...");
    eval_opts.add(ev, "--kind", "kind", "zero_shot, few_shot, zs_cot or fs_cot");
    eval_opts.add(ev, "--shots", "shots", "few-shot exemplar count");
    eval_opts.flag(ev, "--with-panda", "with_panda", "insert retrieved insights");
    eval_opts.add(ev, "--ablation", "ablation", "none, raw1, raw2 or pseudo_label_shots");
    eval_opts.add(ev, "--k", "k", "insights retrieved per query");
    eval_opts.add(ev, "--min-similarity", "min_similarity", "drop hits below this cosine");
    eval_opts.add(ev, "--seed", "seed", "exemplar selection seed");
    eval_opts.add(ev, "--report", "report", "per-example JSONL report");

    auto* flip = app.add_subcommand("flip", "rewrite a dataset to a target label accuracy");
    flip_opts.add(flip, "--config", "config", "key = value settings file");
    flip_opts.add(flip, "--dataset", "dataset", "labelled JSONL");
    flip_opts.add(flip, "--out", "out", "flipped JSONL to write");
    flip_opts.add(flip, "--ta", "ta", "target accuracy in (0, 1]");
    flip_opts.add(flip, "--seed", "seed", "flip seed");
    flip_opts.add(flip, "--num-classes", "num_classes", "label count (default: max gold + 1)");
    flip_opts.add(flip, "--manifest", "manifest", "manifest path");

    auto* episode = app.add_subcommand("episode", "run agent episodes");
    add_common(episode, episode_opts);
    episode_opts.add(episode, "--env", "env", "toy or cmd");
    episode_opts.add(episode, "--env-cmd", "env_cmd", "command speaking the line-JSON protocol");
    episode_opts.add(episode, "--task", "task", "environment task id");
    episode_opts.add(episode, "--variations", "variations", "comma-separated variation ids");
    episode_opts.add(episode, "--rounds", "rounds", "episodes per variation");
    episode_opts.add(episode, "--step-cap", "step_cap", "maximum actions per episode");
    episode_opts.add(episode, "--pool", "pool", "insight pool");
    episode_opts.flag(episode, "--with-panda", "with_panda", "insert retrieved insights");
    episode_opts.add(episode, "--refresh-per-step", "refresh_per_step", "re-retrieve every step (true/false)");
    episode_opts.add(episode, "--k", "k", "insights retrieved per step");
    episode_opts.add(episode, "--report", "report", "episode JSONL report");

    auto* toy = app.add_subcommand("toy-env", "serve the toy environment on stdin/stdout");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (toy->parsed()) {
            env::ToyEnvironment env;
            env::serve(env, in, out);
            return kExitOk;
        }
        config::Settings settings;
        const OptionSet* opts = learn->parsed() ? &learn_opts
                                : ev->parsed()  ? &eval_opts
                                : flip->parsed() ? &flip_opts
                                                 : &episode_opts;
        opts->apply(settings);
        if (auto cfg = settings.get("config")) settings.load_file(*cfg);

        if (learn->parsed()) return cmd_learn(settings, out);
        if (ev->parsed()) return cmd_eval(settings, out);
        if (flip->parsed()) return cmd_flip(settings, out);
        return cmd_episode(settings, out);
    } catch (const EmptyPool& e) {
        err << "error: " << e.what() << "\n";
        return kExitEmptyPool;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_config_kind(e.kind()) ? kExitConfig : kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace panda::cli
