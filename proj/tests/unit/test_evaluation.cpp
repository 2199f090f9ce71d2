#include <doctest.h>

#include <sstream>

#include "panda/error.hpp"
#include "panda/evaluation.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace panda;
using namespace panda::eval;

namespace {

std::vector<LabeledExample> tiny_dataset() {
    return {{"a", "alpha", 0, std::nullopt}, {"b", "beta", 1, std::nullopt}, {"c", "gamma", 2, std::nullopt},
            {"d", "delta", 2, std::nullopt}};
}

ClassificationEvalSetup zero_shot_setup() {
    ClassificationEvalSetup s;
    s.task = {"sentiment", prompt::LabelMapping::from_names({"negative", "neutral", "positive"})};
    s.mode = {prompt::PromptKind::zero_shot, 0, false, prompt::Ablation::none};
    return s;
}

llm::RetryPolicy no_wait() {
    llm::RetryPolicy p;
    p.max_attempts = 1;
    p.sleep = [](std::chrono::milliseconds) {};
    return p;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("macro-F1 worked cases") {
    CHECK(macro_f1({0, 1, 2}, {0, 1, 2}, 3).macro_f1 == 1.0);
    CHECK(macro_f1({0, 0, 1}, {0, 1, 1}, 2).macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(macro_f1({0, 0}, {0, 1}, 2).macro_f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("absent classes count toward the mean") {
    const auto r = macro_f1({0, 0}, {0, 0}, 4);
    CHECK(r.per_class_f1 == std::vector<double>{1.0, 0.0, 0.0, 0.0});
    CHECK(r.macro_f1 == 0.25);
}

TEST_CASE("parse failures are false negatives only") {
    const auto r = macro_f1({kParseFailure, 1}, {0, 1}, 2);
    CHECK(r.n_parse_failures == 1);
    CHECK(r.per_class_f1[0] == 0.0);
    CHECK(r.per_class_f1[1] == 1.0);
    CHECK(r.macro_f1 == doctest::Approx(oracle::macro_f1({kParseFailure, 1}, {0, 1}, 2)));
}

TEST_CASE("macro-F1 errors") {
    CHECK_THROWS_AS(macro_f1({0}, {0, 1}, 2), LengthMismatch);
    CHECK_THROWS_AS(macro_f1({}, {}, 2), EmptyInput);
    CHECK_THROWS(macro_f1({0}, {5}, 2));
    CHECK_THROWS(macro_f1({7}, {0}, 2));
}

TEST_CASE("dataset parsing") {
    std::istringstream in(R"({"id":"1","text":"t","gold":2,"rationale":"r"})" "\n\n" R"({"id":"2","text":"u","gold":0})");
    const auto d = parse_dataset(in);
    REQUIRE(d.size() == 2);
    CHECK(d[0].rationale == "r");
    CHECK_FALSE(d[1].rationale.has_value());
    std::ostringstream out;
    write_dataset(d, out);
    std::istringstream again(out.str());
    CHECK(parse_dataset(again) == d);

    std::istringstream dup(R"({"id":"1","text":"t","gold":2})" "\n" R"({"id":"1","text":"t","gold":2})");
    CHECK_THROWS_AS(parse_dataset(dup), DuplicateId);
    std::istringstream bad(R"({"id":"1","text":"t"})");
    CHECK_THROWS_AS(parse_dataset(bad), MalformedRecord);
}

TEST_CASE("echoing gateway scores 1.0 and garbage scores 0.0") {
    const auto data = tiny_dataset();
    std::vector<llm::MockProvider::Rule> rules;
    for (const auto& ex : data) rules.push_back({"Text: " + ex.text + "\n", std::to_string(ex.gold)});
    llm::MockProvider echo(rules, "x");
    llm::Gateway gw(echo, "mock");
    const auto good = run_classification_eval(data, zero_shot_setup(), gw);
    CHECK(good.macro_f1 == 1.0);
    CHECK(good.outcomes.size() == 4);
    CHECK(good.outcomes[2].id == "c");
    CHECK(good.outcomes[2].pred == 2);

    llm::MockProvider garbage({}, "garbage");
    llm::Gateway gw2(garbage, "mock");
    const auto bad = run_classification_eval(data, zero_shot_setup(), gw2);
    CHECK(bad.macro_f1 == 0.0);
    CHECK(bad.n_parse_failures == 4);
}

TEST_CASE("gateway failures become recorded parse failures") {
    const auto data = tiny_dataset();
    llm::MockProvider m({}, "1", {"beta"});
    llm::Gateway gw(m, "mock", nullptr, no_wait());
    const auto r = run_classification_eval(data, zero_shot_setup(), gw);
    CHECK(r.n_parse_failures == 1);
    CHECK(r.outcomes[1].pred == kParseFailure);
    CHECK(r.outcomes[1].error.find("ProviderError") != std::string::npos);
}

TEST_CASE("configuration errors abort") {
    const auto data = tiny_dataset();
    llm::MockProvider m({}, "1");
    llm::Gateway gw(m, "mock");
    auto s = zero_shot_setup();
    s.mode.with_panda = true;
    CHECK_THROWS_AS(run_classification_eval(data, s, gw), ConfigError);
    s = zero_shot_setup();
    auto bad = data;
    bad[0].gold = 9;
    CHECK_THROWS_AS(run_classification_eval(bad, s, gw), ConfigError);
    s.mode = {prompt::PromptKind::few_shot, 2, false, prompt::Ablation::none};
    CHECK_THROWS_AS(run_classification_eval(data, s, gw), MissingExemplars);
}

TEST_CASE("episode with and without a planted insight") {
    auto provider = llm::MockProvider::from_json_file(testing::fixture("mock_rules_planted.json").string());
    llm::Gateway gw(*provider, "mock");
    retrieval::HashEmbedder emb(64);
    InsightPool pool(emb.id(), emb.dim());
    env::ToyEnvironment probe;
    const auto key = env::extended_observation(probe.reset(env::ToyEnvironment::kTask, "0"));
    pool.add({"ins-1", "r", key, "Best action: focus on egg giant tortoise", "mock"}, emb.embed_one(key));

    EpisodeConfig cfg;
    cfg.task = env::ToyEnvironment::kTask;
    cfg.variation = "0";
    cfg.step_cap = 5;

    env::ToyEnvironment e1;
    const auto with = run_agent_episode(e1, cfg, &pool, &emb, gw);
    CHECK(with.score == 100.0);
    CHECK(with.steps == 1);
    CHECK(with.done);
    CHECK(with.actions == std::vector<std::string>{"focus on egg giant tortoise"});
    CHECK(with.trajectory.rfind("Here is the task.\n", 0) == 0);

    env::ToyEnvironment e2;
    const auto without = run_agent_episode(e2, cfg, nullptr, nullptr, gw);
    CHECK(without.score == 0.0);
    CHECK(without.steps == 5);
    CHECK(without.hit_step_cap);

    env::ToyEnvironment e3;
    cfg.step_cap = 0;
    const auto none = run_agent_episode(e3, cfg, &pool, &emb, gw);
    CHECK(none.steps == 0);
    CHECK(none.score == 0.0);
}

TEST_CASE("action parsing") {
    CHECK(parse_action("> focus on egg dog\nbecause") == "focus on egg dog");
    CHECK(parse_action("\n\n  look around  ") == "look around");
    CHECK(parse_action("") == "");
}

TEST_CASE("episode aggregation") {
    std::vector<EpisodeResult> rs(3);
    rs[0] = {"t", "0", 0.0, 1, "", true, false, {}};
    rs[1] = {"t", "0", 100.0, 1, "", true, false, {}};
    rs[2] = {"t", "1", 50.0, 1, "", true, false, {}};
    const auto agg = aggregate_episodes(rs, 2);
    CHECK(agg.per_variation.at({"t", "0"}) == 50.0);
    CHECK(agg.per_variation.at({"t", "1"}) == 50.0);
    CHECK(agg.per_task.at("t") == 50.0);
    REQUIRE(agg.incomplete.size() == 1);
    CHECK(agg.incomplete[0].second == "1");
    CHECK_THROWS_AS(aggregate_episodes({}, 5), EmptyResults);
    CHECK_THROWS_AS(aggregate_episodes(rs, 0), ConfigError);
    CHECK(kDefaultRounds == 5);
}

TEST_CASE("label flipping counts and inequality") {
    std::vector<LabeledExample> d;
    for (int i = 0; i < 4; ++i) d.push_back({"e" + std::to_string(i), "t", i % 3, std::nullopt});
    const auto out = flip_labels(d, {0.5, 9, 3});
    CHECK(out.flipped.size() == 2);
    for (auto i : out.flipped) CHECK(out.examples[i].gold != d[i].gold);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < d.size(); ++i) changed += out.examples[i].gold != d[i].gold;
    CHECK(changed == 2);
    CHECK(flip_labels(d, {1.0, 9, 3}).examples == d);
    CHECK_THROWS_AS(flip_labels(d, {0.0, 9, 3}), InvalidTA);
    CHECK_THROWS_AS(flip_labels(d, {1.2, 9, 3}), InvalidTA);
    CHECK_THROWS_AS(flip_labels(d, {0.5, 9, 1}), ConfigError);
}

}
