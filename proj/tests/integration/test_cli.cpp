#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "panda/cli.hpp"
#include "panda/util.hpp"
#include "test_support.hpp"

using namespace panda;
using namespace panda::testing;
using nlohmann::json;

namespace {

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

json summary_of(const std::string& report) {
    const auto lines = read_lines(report);
    REQUIRE_FALSE(lines.empty());
    return json::parse(lines.back()).at("summary");
}

CliResult learn_sentiment(const SentimentCorpus& c, const std::string& pool, std::vector<std::string> extra = {}) {
    return run_cli(with(with({"learn", "--expert", c.expert, "--pool", pool, "--labels", "negative,neutral,positive"},
                             mock_flags()),
                        extra));
}

CliResult eval_sentiment(const SentimentCorpus& c, const std::string& report, std::vector<std::string> extra) {
    return run_cli(with(with({"eval", "--dataset", c.dataset, "--report", report, "--task", "sentiment", "--labels",
                              "negative,neutral,positive"},
                             mock_flags()),
                        extra));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("learn writes a pool and a report") {
    TempDir dir;
    const auto c = write_sentiment_corpus(dir, 9);
    const auto pool = dir.file("pool.jsonl");
    const auto r = learn_sentiment(c, pool);
    REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
    CHECK(r.last_line() == "provider_calls=9");
    CHECK(read_lines(pool).size() == 10);
    const auto report = json::parse(read_file(pool + ".report.json"));
    CHECK(report.at("n_entries") == 9);
    CHECK(report.at("skipped").empty());
    CHECK(report.at("config_hash").get<std::string>().size() == 64);
    CHECK(report.at("pool_digest") == sha256_hex(read_file(pool)));
}

TEST_CASE("single-candidate records are skipped with a reason") {
    TempDir dir;
    const auto pool = dir.file("pool.jsonl");
    const auto r = run_cli(with({"learn", "--expert", fixture("expert_single_candidate.jsonl").string(), "--pool",
                                 pool, "--labels", "negative,neutral,positive"},
                                mock_flags()));
    REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
    const auto report = json::parse(read_file(pool + ".report.json"));
    CHECK(report.at("n_entries") == 1);
    REQUIRE(report.at("skipped").size() == 2);
    for (const auto& s : report.at("skipped")) {
        CHECK(s.at("cause").get<std::string>().rfind("NTooLarge", 0) == 0);
    }
}

TEST_CASE("learn exit codes") {
    TempDir dir;
    SUBCASE("missing expert file") {
        const auto r = run_cli(with({"learn", "--expert", dir.file("absent.jsonl"), "--pool", dir.file("p.jsonl"),
                                     "--labels", "a,b"},
                                    mock_flags()));
        CHECK(r.code == cli::kExitConfig);
    }
    SUBCASE("every record skipped") {
        std::ofstream(dir.file("one.jsonl"))
            << R"({"id":"x","task":"sentiment","query":"q","candidates":[{"text":"positive","score":1}]})" << "\n";
        const auto r = run_cli(with({"learn", "--expert", dir.file("one.jsonl"), "--pool", dir.file("p.jsonl"),
                                     "--labels", "negative,neutral,positive"},
                                    mock_flags()));
        CHECK(r.code == cli::kExitEmptyPool);
        CHECK_FALSE(std::filesystem::exists(dir.file("p.jsonl")));
    }
    SUBCASE("mock provider without rules") {
        const auto c = write_sentiment_corpus(dir, 3);
        const auto r = run_cli({"learn", "--expert", c.expert, "--pool", dir.file("p.jsonl"), "--labels", "a,b,c"});
        CHECK(r.code == cli::kExitConfig);
    }
    SUBCASE("unknown flag") {
        CHECK(run_cli({"learn", "--bogus"}).code == cli::kExitConfig);
    }
}

TEST_CASE("eval is deterministic and panda beats the baseline") {
    TempDir dir;
    const auto c = write_sentiment_corpus(dir, 12);
    const auto pool = dir.file("pool.jsonl");
    REQUIRE(learn_sentiment(c, pool).code == cli::kExitOk);

    const auto a = eval_sentiment(c, dir.file("a.jsonl"), {"--with-panda", "--pool", pool});
    REQUIRE_MESSAGE(a.code == cli::kExitOk, a.err);
    CHECK(a.last_line() == "macro_f1=1.0");
    const auto first_run = read_file(dir.file("a.jsonl"));
    REQUIRE(eval_sentiment(c, dir.file("a.jsonl"), {"--with-panda", "--pool", pool, "--workers", "1"}).code == 0);
    CHECK(read_file(dir.file("a.jsonl")) == first_run);

    const auto base = eval_sentiment(c, dir.file("base.jsonl"), {});
    REQUIRE(base.code == cli::kExitOk);
    const double f1 = summary_of(dir.file("base.jsonl")).at("macro_f1");
    CHECK(f1 == doctest::Approx(1.0 / 6.0));

    const auto lines = read_lines(dir.file("a.jsonl"));
    CHECK(lines.size() == 13);
    const auto first = json::parse(lines.front());
    CHECK(first.at("inserted_insights").size() == 6);
}

TEST_CASE("eval configuration errors") {
    TempDir dir;
    const auto c = write_sentiment_corpus(dir, 3);
    CHECK(eval_sentiment(c, dir.file("r.jsonl"), {"--with-panda"}).code == cli::kExitConfig);
    CHECK(eval_sentiment(c, dir.file("r.jsonl"), {"--kind", "few_shot", "--shots", "2"}).code == cli::kExitConfig);
    CHECK(eval_sentiment(c, dir.file("r.jsonl"), {"--kind", "sideways"}).code == cli::kExitConfig);
    const auto pool = dir.file("pool.jsonl");
    REQUIRE(learn_sentiment(c, pool).code == cli::kExitOk);
    CHECK(eval_sentiment(c, dir.file("r.jsonl"), {"--with-panda", "--ablation", "raw2", "--pool", pool}).code == cli::kExitConfig);
}

TEST_CASE("ablations are tagged in the report") {
    TempDir dir;
    const auto c = write_sentiment_corpus(dir, 6);
    const auto pool = dir.file("pool.jsonl");
    REQUIRE(learn_sentiment(c, pool).code == cli::kExitOk);
    for (const std::string tag : {"raw1", "raw2"}) {
        const auto report = dir.file(tag + ".jsonl");
        const auto r = eval_sentiment(c, report, {"--with-panda", "--ablation", tag, "--pool", pool, "--expert", c.expert});
        REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
        const auto s = summary_of(report);
        CHECK(s.at("ablation") == tag);
        CHECK(s.at("input_digests").contains("expert"));
    }
}

TEST_CASE("few-shot evaluation draws exemplars from the train split") {
    TempDir dir;
    const auto c = write_sentiment_corpus(dir, 6);
    const auto train = write_labeled_dataset(dir, "train.jsonl", 10, 3);
    const auto r = eval_sentiment(c, dir.file("r.jsonl"), {"--kind", "few_shot", "--shots", "3", "--train", train,
                                                           "--seed", "4"});
    REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
    const auto s = summary_of(dir.file("r.jsonl"));
    CHECK(s.at("kind") == "few_shot");
    CHECK(s.at("seed") == 4);
    CHECK(s.at("input_digests").contains("train"));
}

TEST_CASE("response cache serves repeated runs") {
    TempDir dir;
    const auto c = write_sentiment_corpus(dir, 6);
    const auto cache = dir.file("cache.jsonl");
    REQUIRE(eval_sentiment(c, dir.file("a.jsonl"), {"--cache", cache}).code == cli::kExitOk);
    CHECK(summary_of(dir.file("a.jsonl")).at("provider_calls") == 6);
    REQUIRE(eval_sentiment(c, dir.file("b.jsonl"), {"--cache", cache}).code == cli::kExitOk);
    CHECK(summary_of(dir.file("b.jsonl")).at("provider_calls") == 0);

    std::ofstream(cache, std::ios::app) << "{not json\n";
    CHECK(eval_sentiment(c, dir.file("c.jsonl"), {"--cache", cache}).code == cli::kExitConfig);
}

TEST_CASE("flip hits the requested accuracy") {
    TempDir dir;
    const auto data = write_labeled_dataset(dir, "d.jsonl", 1000, 3);
    const auto out = dir.file("f.jsonl");
    const auto r = run_cli({"flip", "--dataset", data, "--out", out, "--ta", "0.25", "--seed", "7"});
    REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
    CHECK(r.last_line() == "flip_count=750");
    const auto manifest = json::parse(read_file(out + ".manifest.json"));
    CHECK(manifest.at("flipped_ids").size() == 750);
    CHECK(manifest.at("output_digest") == sha256_hex(read_file(out)));

    const auto again = dir.file("g.jsonl");
    REQUIRE(run_cli({"flip", "--dataset", data, "--out", again, "--ta", "0.25", "--seed", "7"}).code == 0);
    CHECK(read_file(out) == read_file(again));

    REQUIRE(run_cli({"flip", "--dataset", data, "--out", dir.file("same.jsonl"), "--ta", "1.0"}).code == 0);
    CHECK(read_file(dir.file("same.jsonl")) == read_file(data));

    CHECK(run_cli({"flip", "--dataset", data, "--out", dir.file("x.jsonl"), "--ta", "0"}).code == cli::kExitConfig);
    CHECK(run_cli({"flip", "--dataset", data, "--out", dir.file("x.jsonl")}).code == cli::kExitConfig);
}

TEST_CASE("episodes on the toy environment") {
    TempDir dir;
    const auto pool = dir.file("agent_pool.jsonl");
    const auto learn = run_cli(with({"learn", "--mode", "agent", "--expert",
                                     fixture("expert_agent_top2.jsonl").string(), "--pool", pool},
                                    mock_flags()));
    REQUIRE_MESSAGE(learn.code == cli::kExitOk, learn.err);

    const auto report = dir.file("ep.jsonl");
    const auto panda = run_cli(with({"episode", "--with-panda", "--pool", pool, "--step-cap", "3", "--rounds", "2",
                                     "--report", report},
                                    mock_flags()));
    REQUIRE_MESSAGE(panda.code == cli::kExitOk, panda.err);
    CHECK(panda.last_line() == "mean_score=100.0");
    CHECK(read_lines(report).size() == 7);

    const auto base = run_cli(with({"episode", "--step-cap", "3", "--rounds", "1"}, mock_flags()));
    REQUIRE(base.code == cli::kExitOk);
    CHECK(base.last_line() == "mean_score=0.0");

    CHECK(run_cli(with({"episode", "--with-panda"}, mock_flags())).code == cli::kExitConfig);
    CHECK(run_cli(with({"episode", "--step-cap", "0"}, mock_flags())).code == cli::kExitConfig);
}

TEST_CASE("episodes through an external environment process") {
    TempDir dir;
    const auto pool = dir.file("agent_pool.jsonl");
    REQUIRE(run_cli(with({"learn", "--mode", "agent", "--expert", fixture("expert_agent_top2.jsonl").string(),
                          "--pool", pool},
                         mock_flags()))
                .code == cli::kExitOk);
    const auto r = run_cli(with({"episode", "--env-cmd", panda_binary() + " toy-env", "--variations", "0,1,2",
                                 "--with-panda", "--pool", pool, "--step-cap", "3", "--rounds", "1"},
                                mock_flags()));
    REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
    CHECK(r.last_line() == "mean_score=100.0");
}

TEST_CASE("settings come from flags, then environment, then config file") {
    TempDir dir;
    const auto c = write_sentiment_corpus(dir, 3);
    std::ofstream(dir.file("panda.conf")) << "# eval settings\n"
                                          << "task = sentiment\nlabels = negative,neutral,positive\n"
                                          << "mock-rules = " << fixture("mock_rules_planted.json").string() << "\n"
                                          << "seed = 5\n";
    const auto report = dir.file("r.jsonl");
    auto r = run_cli({"eval", "--config", dir.file("panda.conf"), "--dataset", c.dataset, "--report", report});
    REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
    CHECK(summary_of(report).at("seed") == 5);

    ::setenv("PANDA_SEED", "6", 1);
    r = run_cli({"eval", "--config", dir.file("panda.conf"), "--dataset", c.dataset, "--report", report});
    CHECK(summary_of(report).at("seed") == 6);
    r = run_cli({"eval", "--config", dir.file("panda.conf"), "--dataset", c.dataset, "--report", report, "--seed",
                 "7"});
    CHECK(summary_of(report).at("seed") == 7);
    ::unsetenv("PANDA_SEED");

    CHECK(run_cli({"eval", "--config", dir.file("missing.conf")}).code == cli::kExitConfig);
}

TEST_CASE("the installed binary runs end to end") {
    TempDir dir;
    const auto data = write_labeled_dataset(dir, "d.jsonl", 20, 2);
    const auto cmd = panda_binary() + " flip --dataset " + data + " --out " + dir.file("o.jsonl") +
                     " --ta 0.5 --seed 1 > " + dir.file("stdout.txt");
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(read_file(dir.file("stdout.txt")) == "flip_count=10\n");
    const auto bad = panda_binary() + " flip --dataset " + data + " --out " + dir.file("o.jsonl") + " --ta 2 2>/dev/null";
    const int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == cli::kExitConfig);
}

}
